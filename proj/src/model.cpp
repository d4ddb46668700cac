#include "dicke/model.hpp"

#include <cmath>
#include <string>

namespace dicke {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::NoTransition: return "no transition";
    case ErrorKind::EigensolverFailure: return "eigensolver failure";
    case ErrorKind::DefectiveMatrix: return "defective matrix";
    case ErrorKind::MarginalMode: return "marginal mode";
    case ErrorKind::UnstableFixedPoint: return "unstable fixed point";
    case ErrorKind::CondensateDepleted: return "condensate depleted";
    case ErrorKind::NotConverged: return "not converged";
    case ErrorKind::NoInteriorExtremum: return "no interior extremum";
    case ErrorKind::BranchAmbiguity: return "branch crossing ambiguity";
    case ErrorKind::InsufficientData: return "insufficient data";
  }
  return "unknown";
}

double ModelParams::nominal_coupling() const { return std::sqrt(2.0 * atom_number) * pump_amplitude; }

ModelParams ModelParams::with_nominal_coupling(double y) const {
  ModelParams p = *this;
  p.pump_amplitude = y / std::sqrt(2.0 * atom_number);
  return p;
}

void ModelParams::validate() const {
  require(std::isfinite(atom_number) && atom_number >= 2.0, "atom_number must be >= 2");
  require(std::isfinite(recoil_frequency) && recoil_frequency > 0.0, "recoil_frequency must be > 0");
  require(std::isfinite(loss_half_rate) && loss_half_rate >= 0.0, "loss_half_rate must be >= 0");
  require(std::isfinite(cavity_detuning), "cavity_detuning must be finite");
  require(std::isfinite(light_shift), "light_shift must be finite");
  require(std::isfinite(pump_amplitude), "pump_amplitude must be finite");
  require(mode_cutoff >= 1 && mode_cutoff <= kMaxModeCutoff,
          "mode_cutoff must lie in [1, " + std::to_string(kMaxModeCutoff) + "]");
}

KernelMatrices build_kernels(int mode_cutoff) {
  require(mode_cutoff >= 1, "mode_cutoff must be >= 1");
  require(mode_cutoff <= kMaxModeCutoff, "mode_cutoff exceeds supported limit");
  const int d = mode_cutoff + 1;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  KernelMatrices k{RealMatrix::Zero(d, d), RealMatrix::Zero(d, d), RealMatrix::Zero(d, d)};
  for (int n = 0; n < d; ++n) {
    k.m0(n, n) = static_cast<double>(n) * n;
    // cos^2 overlaps: <0|cos^2|0> = 1/2, <1|cos^2|1> = 3/4, <n|cos^2|n> = 1/2 otherwise (times 4)
    k.m2(n, n) = (n == 1) ? 3.0 : 2.0;
  }
  for (int n = 0; n + 1 < d; ++n) {
    const double v = (n == 0) ? 1.0 : inv_sqrt2;
    k.m1(n, n + 1) = v;
    k.m1(n + 1, n) = v;
  }
  for (int n = 0; n + 2 < d; ++n) {
    const double v = (n == 0) ? std::sqrt(2.0) : 1.0;
    k.m2(n, n + 2) = v;
    k.m2(n + 2, n) = v;
  }
  return k;
}

Couplings couplings(const ModelParams& params, double condensate_number) {
  require(condensate_number > 0.0, "condensate number must be > 0");
  return {std::sqrt(2.0 * condensate_number) * params.pump_amplitude,
          0.25 * condensate_number * params.light_shift};
}

double critical_coupling(const ModelParams& params) {
  const double delta = params.shifted_detuning();
  if (!(delta > 0.0)) {
    throw Error(ErrorKind::NoTransition,
                "shifted detuning delta_C = " + std::to_string(delta) + " must be positive");
  }
  const double kappa = params.loss_half_rate;
  return std::sqrt(params.recoil_frequency * (delta * delta + kappa * kappa) / delta);
}

}  // namespace dicke
