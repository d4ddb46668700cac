#pragma once

#include "dicke/layout.hpp"
#include "dicke/model.hpp"

namespace dicke {

/// Mean fields in the decoupled atomic basis together with the transform
/// that defines that basis.
struct MeanFieldState {
  Complex alpha{0.0, 0.0};     ///< cavity amplitude per sqrt(N_c)
  ComplexVector beta;          ///< condensate, decoupled basis
  ComplexVector gamma;         ///< condensate, Fourier basis (O beta)
  double condensate_number = 0.0;
  Couplings coupling;
  double mu = 0.0;
  double omega = 0.0;          ///< renormalised cavity frequency
  RealMatrix O;
  RealVector lambda;
  RealMatrix mt1;
  RealMatrix mt2;
};

struct Decoupling {
  RealMatrix O;
  RealVector lambda;  ///< ascending
  RealMatrix mt1;
  RealMatrix mt2;
};

/// omega_R M0 + y Re(alpha) M1 + u |alpha|^2 M2 + (u/N_c) Re<a+a> M2.
RealMatrix effective_matrix(const ModelParams& params, const KernelMatrices& kernels,
                            const MeanFieldState& state, const CorrelationTable& corr);

/// Throws EigensolverFailure if the symmetric solver fails or the
/// reconstruction residual exceeds 1e-10.
Decoupling decouple_atomic_modes(const RealMatrix& m, const KernelMatrices& kernels);

/// Copies O, Lambda and the transformed kernels into `state`.
void apply_decoupling(MeanFieldState& state, const Decoupling& dec);

/// HFB back-action source of the condensate equation. Zero correlations give
/// the Bogoliubov limit R = 0.
ComplexVector back_action_vector(const MeanFieldState& state, const CorrelationTable& corr);

/// beta+ (Lambda beta) + beta+ R. The discarded imaginary part is written to
/// `imag_residue` when supplied.
double chemical_potential(const MeanFieldState& state, const ComplexVector& r,
                          double* imag_residue = nullptr);

inline constexpr double kDefaultGuard = 1e-9;
inline constexpr double kBackActionTolerance = 1e-14;

/// Solves (Lambda - mu) beta = -R componentwise and normalises. Denominators
/// smaller than `guard` in magnitude are replaced by sign * guard. For
/// ||R|| < r_tol the ground state of Lambda is returned.
ComplexVector update_beta(const RealVector& lambda, double mu, const ComplexVector& r,
                          double guard = kDefaultGuard, double r_tol = kBackActionTolerance);

/// -Delta_C + u beta+ Mt2 beta + (u/N_c) Re sum Mt2_jk <b_j+ b_k>.
double cavity_frequency(const ModelParams& params, const MeanFieldState& state,
                        const CorrelationTable& corr);

struct AlphaUpdate {
  Complex alpha;
  double omega;
};

/// Stationary cavity amplitude for the current beta. Throws InvalidArgument
/// when Omega - i kappa vanishes.
AlphaUpdate update_alpha(const ModelParams& params, const MeanFieldState& state,
                         const CorrelationTable& corr);

/// N - sum_j Re<b_j+ b_j>, clamped below at min_fraction * N. `clamped` is set
/// when the clamp was active. Throws CondensateDepleted if depletion >= N.
double condensate_number(double atom_number, const CorrelationTable& corr,
                         double min_fraction = 1e-3, bool* clamped = nullptr);

}  // namespace dicke
