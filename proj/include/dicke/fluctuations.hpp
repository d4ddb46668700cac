#pragma once

#include "dicke/layout.hpp"
#include "dicke/meanfield.hpp"

namespace dicke {

/// Linear fluctuation equations i dv/dt = F v + noise with diffusion D.
struct FluctuationSystem {
  ComplexMatrix F;
  RealMatrix D;
  int zero_mode_index = 0;  ///< decoupled-basis index of the condensate mode
};

/// Right eigenvectors are the columns of `right`, left eigenvectors the
/// columns of `left`, normalised so that left.adjoint() * right = I.
struct EigenSystem {
  ComplexVector omegas;
  ComplexMatrix right;
  ComplexMatrix left;
  double biorthogonality_residual = 0.0;  ///< max |l_k+ r_j - delta_kj|
  double eigen_residual = 0.0;            ///< max_j ||F r_j - omega_j r_j||
};

inline constexpr double kDegeneracyTolerance = 1e-8;
inline constexpr double kDefectiveThreshold = 1e-6;
inline constexpr double kNoiseWeightCutoff = 1e-14;
inline constexpr double kMarginalThreshold = 1e-10;
/// A slow pair is only fatal when its contribution |W/(omega_k+omega_l)|
/// would exceed this bound; weakly coupled modes in the limit of vanishing
/// coupling have damping and noise weight that vanish together.
inline constexpr double kMarginalContribution = 1e10;

/// Row/column of `v` for the zero mode are cleared after assembly. The HFB
/// terms use `corr`; pass a zero table for the Bogoliubov limit.
FluctuationSystem assemble_F(const ModelParams& params, const MeanFieldState& state,
                             const CorrelationTable& corr);

/// Zero except D(a, a+) = 2 kappa.
RealMatrix assemble_D(const ModelParams& params, int size);

/// Throws EigensolverFailure or DefectiveMatrix.
EigenSystem bi_orthogonal_eigensystem(const ComplexMatrix& F);

/// Normal-mode steady state of the linear Langevin system. Pairs whose
/// projected noise weight is negligible are skipped; a noisy pair with
/// |omega_k + omega_l| < 1e-10 whose contribution would diverge raises
/// MarginalMode.
CorrelationTable steady_state_correlations(const EigenSystem& eig, const RealMatrix& D);

/// Largest imaginary part over all eigenfrequencies.
double max_growth_rate(const EigenSystem& eig);

}  // namespace dicke
