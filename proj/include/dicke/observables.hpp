#pragma once

#include <string>
#include <vector>

#include "dicke/scf.hpp"

namespace dicke {

struct PhotonSplit {
  double coherent = 0.0;    ///< N_c |alpha|^2
  double incoherent = 0.0;  ///< <a+ a>
  double total() const { return coherent + incoherent; }
};

PhotonSplit photon_split(const SteadyState& state);

/// |gamma_n|^2 per Fourier mode.
RealVector condensate_populations(const SteadyState& state);

/// <c_n+ c_n> per Fourier mode (real parts).
RealVector depletion_populations(const SteadyState& state);

/// One eigenfrequency of each (omega, -omega*) pair, i.e. those with
/// Re omega >= -tol, excluding the regularised zero mode. Ordered by |omega|.
struct ModeCandidate {
  Complex omega;
  Eigen::Index index;      ///< column in eig.right
  double cavity_weight;    ///< |r_a|^2 + |r_a+|^2 of the normalised right vector
};
std::vector<ModeCandidate> positive_modes(const SteadyState& state, double tol = 1e-9);

/// Positive-branch mode with the smallest modulus, the soft mode near y_c.
Complex soft_mode(const SteadyState& state);

struct SpectrumBranch {
  std::string label;  ///< "omega_cav", "omega1", "omega2", ...
  std::vector<Complex> values;
};

struct Spectrum {
  std::vector<double> y;
  std::vector<SpectrumBranch> branches;
  double min_abs_im_omega1 = 0.0;
  double y_min = 0.0;

  const SpectrumBranch& branch(const std::string& label) const;
};

/// Continues branches along y-ordered states by nearest-neighbour matching in
/// the complex plane, falling back to eigenvector overlap when two candidates
/// are equally close. Branches are labelled on the first state: the mode with
/// the largest cavity weight is omega_cav, the rest are omega1, omega2, ... by
/// modulus. Throws BranchAmbiguity when overlap cannot separate a near tie.
Spectrum excitation_spectrum(const std::vector<const SteadyState*>& states,
                             const std::vector<double>& y_values);

struct FanoResult {
  double value = 1.0;
  double truncated = 0.0;     ///< 1 + 2n + 2 Re(alpha*^2 m)/|alpha|^2, NaN when alpha = 0
  bool vacuum_limit = false;  ///< no photons; value set to 1
};

/// Full Gaussian evaluation of Var(n)/<n> for the displaced cavity field.
FanoResult fano_factor(const SteadyState& state);

/// Same formula from scalars; exposed for testing.
FanoResult fano_from_moments(double condensate_number, Complex alpha, double n, Complex m);

/// Symmetrically ordered covariance over (x, p, X_0, P_0, ..., X_n, P_n).
/// Anti-normal moments come from the normal-ordered ones plus commutators, so
/// undamped modes without noise are represented as vacuum.
RealMatrix covariance_matrix(const CorrelationTable& corr);
RealMatrix covariance_matrix(const SteadyState& state);

/// Absolute eigenvalues of i Omega C, one per conjugate pair, ascending.
RealVector symplectic_eigenvalues(const RealMatrix& c);

/// Cavity vs atoms; p -> -p on the cavity block. Throws InvalidArgument for a
/// non-symmetric or non-finite matrix.
double logarithmic_negativity(const RealMatrix& c);

struct ObservableSet {
  double y = 0.0;
  PhotonSplit photons;
  RealVector condensate_populations;
  RealVector depletion_populations;
  std::vector<ModeCandidate> modes;
  FanoResult fano;
  double log_negativity = 0.0;
  double min_symplectic_eigenvalue = 0.5;
  Complex soft_mode{0.0, 0.0};
};

ObservableSet compute_observables(const SteadyState& state);

}  // namespace dicke
