#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dicke/io.hpp"
#include "support.hpp"

using namespace dicke;

namespace {

const std::vector<SteadyState>& states() {
  static const std::vector<SteadyState> s = testing::random_stable_states(32, 20240611);
  return s;
}

}  // namespace

TEST_CASE("enough random stable fixed points") {
  CHECK(states().size() >= 30);
  int sr = 0;
  for (const auto& s : states()) sr += std::norm(s.meanfield.alpha) > 1e-10;
  CHECK(sr >= 5);
  CHECK(static_cast<int>(states().size()) - sr >= 5);
}

TEST_CASE("biorthonormality residual") {
  for (const auto& s : states()) {
    const Eigen::Index n = s.eig.omegas.size();
    const double res =
        (s.eig.left.adjoint() * s.eig.right - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    CHECK(res < 1e-10);
    CHECK(s.eig.biorthogonality_residual < 1e-10);
  }
}

TEST_CASE("spectrum pairing omega with -conj(omega)") {
  for (const auto& s : states()) {
    const ComplexVector& w = s.eig.omegas;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      double best = INFINITY;
      for (Eigen::Index j = 0; j < w.size(); ++j) best = std::min(best, std::abs(w(j) + std::conj(w(i))));
      CHECK(best < 1e-9);
    }
  }
}

TEST_CASE("vacuum of the decoupled cavity") {
  for (double n : {1e2, 1e4}) {
    const SteadyState s = solve(testing::reference_params(n, 0.0), SolverConfig{});
    REQUIRE(s.converged);
    CHECK(std::abs(s.corr.moments(Layout::ad(), Layout::a())) < 1e-12);
    CHECK(std::abs(s.corr.moments(Layout::a(), Layout::ad()) - 1.0) < 1e-12);
  }
}

TEST_CASE("correlations match time integration") {
  int checked = 0;
  for (const auto& s : states()) {
    // Modes damped at ~1e-8 of ||F|| cannot be resolved to 1e-8 by any
    // double-precision method; only well-conditioned points are compared.
    if (testing::damping_condition(s.system.F) > 1e6) continue;
    const ComplexMatrix oracle = testing::integrated_correlations(s.system.F, s.system.D);
    const double scale = oracle.cwiseAbs().maxCoeff();
    const double err = (s.corr.moments - oracle).cwiseAbs().maxCoeff() / scale;
    CHECK(err < 1e-8);
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("condensate normalisation and Fourier map") {
  for (const auto& s : states()) {
    const MeanFieldState& m = s.meanfield;
    CHECK(std::abs(m.beta.norm() - 1.0) < 1e-12);
    CHECK((m.gamma - m.O.cast<Complex>() * m.beta).norm() < 1e-12);
  }
}

TEST_CASE("commutator preserved") {
  for (const auto& s : states()) {
    const Complex c = s.corr.moments(Layout::a(), Layout::ad()) - s.corr.moments(Layout::ad(), Layout::a());
    CHECK(std::abs(c - 1.0) < 1e-8);
  }
}

TEST_CASE("covariance physicality (logged)") {
  int violations = 0;
  for (const auto& s : states()) {
    const RealVector nu = symplectic_eigenvalues(covariance_matrix(s));
    if (nu.minCoeff() < 0.5 - 1e-6) {
      ++violations;
      MESSAGE("symplectic eigenvalue " << nu.minCoeff() << " at N=" << s.params.atom_number
                                       << " y=" << s.params.nominal_coupling());
    }
  }
  MESSAGE(violations << " of " << states().size() << " states below 1/2");
}

TEST_CASE("power-law fit is exact on synthetic data") {
  for (double expo : {-0.44, 0.0, 0.41, 1.7}) {
    std::vector<double> x, v;
    for (double n : {1e2, 1e3, 1e4, 1e5, 3e5}) {
      x.push_back(n);
      v.push_back(2.5 * std::pow(n, expo));
    }
    const PowerLawFit f = fit_power_law(x, v);
    CHECK(std::abs(f.exponent - expo) < 1e-10);
    CHECK(std::abs(f.intercept - std::log(2.5)) < 1e-10);
    CHECK(f.stderr_exponent < 1e-10);
  }
}

TEST_CASE("byte-identical reruns") {
  auto run_sweep = [] {
    ModelParams p;
    p.atom_number = 1000.0;
    std::ostringstream os;
    write_sweep_csv(os, sweep(p, SolverConfig{}, linspace(1.8, 2.3, 11)));
    return os.str();
  };
  CHECK(run_sweep() == run_sweep());

  auto run_solve = [] {
    SolverConfig c;
    c.init = InitKind::Random;
    c.seed = 7;
    // Either outcome of a random start must repeat exactly.
    try {
      return solve_document(solve(testing::reference_params(500.0, 1.2), c), c).dump();
    } catch (const Error& e) {
      return std::string(e.what());
    }
  };
  CHECK(run_solve() == run_solve());

  auto run_collapse = [](int jobs) {
    ModelParams p;
    std::ostringstream os;
    write_collapse_csv(os, scaling_collapse(p, SolverConfig{}, {1e2, 1e3, 1e4}, 1.5, 1.9, 9, jobs));
    return os.str();
  };
  CHECK(run_collapse(1) == run_collapse(3));
}
