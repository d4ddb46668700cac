#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "dicke/scf.hpp"

namespace dicke::testing {

/// Reference setup: omega_R = 1, Delta_C = -2, kappa = 2, U_0 = 0, n_max = 2.
inline ModelParams reference_params(double atom_number, double y) {
  ModelParams p;
  p.atom_number = atom_number;
  return p.with_nominal_coupling(y);
}

/// Converged, dynamically stable HFB states over randomly drawn parameters
/// on both sides of the transition. Deterministic for a given seed.
inline std::vector<SteadyState> random_stable_states(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<SteadyState> out;
  SolverConfig cfg;
  for (int attempt = 0; static_cast<int>(out.size()) < count && attempt < 40 * count; ++attempt) {
    ModelParams p;
    p.atom_number = std::pow(10.0, 2.0 + 3.0 * uni(rng));
    p.recoil_frequency = 0.5 + uni(rng);
    p.cavity_detuning = -(1.0 + 3.0 * uni(rng));
    p.loss_half_rate = 0.5 + 2.5 * uni(rng);
    p.light_shift = uni(rng) < 0.5 ? 0.0 : -0.5 * uni(rng) / p.atom_number;
    p.mode_cutoff = 1 + static_cast<int>(uni(rng) * 4.0);
    const double yc = critical_coupling(p);
    // Stay clear of the fold region, where cold starts need continuation.
    const double y = uni(rng) < 0.5 ? yc * (0.2 + 0.7 * uni(rng)) : yc * (1.3 + 0.7 * uni(rng));
    try {
      const ModelParams q = p.with_nominal_coupling(y);
      std::optional<SteadyState> seed;
      if (y > yc) {
        SolverConfig bog = cfg;
        bog.mode = SolverMode::Bogoliubov;
        seed = solve(q, bog);
      }
      SteadyState s = solve(q, cfg, seed ? &seed->iterate : nullptr);
      if (s.converged) out.push_back(std::move(s));
    } catch (const Error&) {
    }
  }
  return out;
}

/// ||F|| / slowest nonzero damping rate. The steady-state moments cannot be
/// resolved in double precision to better than about this times 1e-16.
inline double damping_condition(const ComplexMatrix& F) {
  const double norm = F.cwiseAbs().rowwise().sum().maxCoeff();
  const Eigen::ComplexEigenSolver<ComplexMatrix> es(F, false);
  double slowest = INFINITY;
  for (Eigen::Index k = 0; k < F.rows(); ++k) {
    const double g = -es.eigenvalues()(k).imag();
    if (g > 1e-12 * norm) slowest = std::min(slowest, g);
  }
  return norm / slowest;
}

// C = int_0^T exp(A t) D exp(A^T t) dt with A = -i F, by a Van Loan block
// exponential over a short step followed by repeated doubling of the horizon.
// T is long against the slowest damped mode; undamped modes contribute only
// through noise they actually receive within T.
inline ComplexMatrix integrated_correlations(const ComplexMatrix& F, const RealMatrix& D) {
  const Eigen::Index n = F.rows();
  const ComplexMatrix A = Complex(0.0, -1.0) * F;
  const double rate = std::max(1.0, A.cwiseAbs().rowwise().sum().maxCoeff());
  double slowest = rate;
  const Eigen::ComplexEigenSolver<ComplexMatrix> es(A, false);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double g = -es.eigenvalues()(k).real();
    if (g > 1e-12 * rate) slowest = std::min(slowest, g);
  }
  const double horizon = 80.0 / slowest;
  const double h = 0.5 / rate;
  ComplexMatrix block = ComplexMatrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = A * h;
  block.topRightCorner(n, n) = D.cast<Complex>() * h;
  block.bottomRightCorner(n, n) = -A.transpose() * h;
  const ComplexMatrix e = block.exp();
  ComplexMatrix phi = e.topLeftCorner(n, n);
  ComplexMatrix q = e.topRightCorner(n, n) * phi.transpose();
  for (double t = h; t < horizon; t *= 2.0) {
    q = q + phi * q * phi.transpose();
    phi = phi * phi;
  }
  return q;
}

}  // namespace dicke::testing
