#pragma once

#include <Eigen/Dense>

#include "dicke/error.hpp"

namespace dicke {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Largest supported Fourier cutoff. Matrices are (n_max+1) square.
inline constexpr int kMaxModeCutoff = 16;

/// Physical constants of one run. Frequencies share one unit; the figures
/// of the reference setup use omega_R = 1.
struct ModelParams {
  double atom_number = 1000.0;      ///< N
  double recoil_frequency = 1.0;    ///< omega_R
  double cavity_detuning = -2.0;    ///< Delta_C = omega - omega_C
  double loss_half_rate = 2.0;      ///< kappa (photon loss rate is 2 kappa)
  double light_shift = 0.0;         ///< U_0
  double pump_amplitude = 0.0;      ///< eta_t
  int mode_cutoff = 2;              ///< n_max

  int atomic_modes() const { return mode_cutoff + 1; }

  /// delta_C = -Delta_C + N U_0 / 2
  double shifted_detuning() const { return -cavity_detuning + 0.5 * atom_number * light_shift; }

  /// Nominal coupling sqrt(2N) eta_t, i.e. the coupling with no depletion.
  /// Sweeps are parameterised by this value.
  double nominal_coupling() const;

  /// Copy with eta_t chosen so that nominal_coupling() == y.
  ModelParams with_nominal_coupling(double y) const;

  /// Throws InvalidArgument on N < 2, omega_R <= 0, kappa < 0, bad cutoff or
  /// non-finite entries.
  void validate() const;
};

/// Kernel matrices of the Fourier-mode quadratic forms: kinetic (M0),
/// pump scattering (M1, bandwidth 1) and light shift (M2, bandwidth 2).
struct KernelMatrices {
  RealMatrix m0;
  RealMatrix m1;
  RealMatrix m2;

  int size() const { return static_cast<int>(m0.rows()); }
};

KernelMatrices build_kernels(int mode_cutoff);

struct Couplings {
  double y = 0.0;  ///< sqrt(2 N_c) eta_t
  double u = 0.0;  ///< N_c U_0 / 4
};

Couplings couplings(const ModelParams& params, double condensate_number);

/// Thermodynamic-limit critical coupling sqrt(omega_R (delta_C^2 + kappa^2) / delta_C).
/// Throws NoTransition when delta_C <= 0.
double critical_coupling(const ModelParams& params);

}  // namespace dicke
