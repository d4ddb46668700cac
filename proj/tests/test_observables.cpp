#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "dicke/observables.hpp"
#include "support.hpp"

using namespace dicke;
using testing::reference_params;

namespace {

// Two-mode squeezed vacuum between the cavity and atomic mode 0.
CorrelationTable two_mode_squeezed(double r) {
  CorrelationTable c(1);
  const Layout lay(1);
  const double sh = std::sinh(r), ch = std::cosh(r);
  c.moments(Layout::ad(), Layout::a()) = sh * sh;
  c.moments(Layout::a(), Layout::ad()) = ch * ch;
  c.moments(lay.bd(0), lay.b(0)) = sh * sh;
  c.moments(lay.b(0), lay.bd(0)) = ch * ch;
  c.moments(Layout::a(), lay.b(0)) = ch * sh;
  c.moments(lay.b(0), Layout::a()) = ch * sh;
  c.moments(Layout::ad(), lay.bd(0)) = ch * sh;
  c.moments(lay.bd(0), Layout::ad()) = ch * sh;
  return c;
}

struct FockGaussian {
  double n;
  Complex m;
  double fano;
};

// Displaced squeezed thermal state built in a truncated Fock space.
FockGaussian fock_gaussian(Complex A, Complex zeta, double nth, int dim) {
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  const ComplexMatrix ad = a.adjoint();
  const ComplexMatrix S =
      (0.5 * (std::conj(zeta) * a * a - zeta * ad * ad)).eval().exp();
  const ComplexMatrix D = (A * ad - std::conj(A) * a).eval().exp();
  ComplexMatrix th = ComplexMatrix::Zero(dim, dim);
  const double q = nth / (1.0 + nth);
  for (int k = 0; k < dim; ++k) th(k, k) = (1.0 - q) * std::pow(q, k);
  const ComplexMatrix rho0 = S * th * S.adjoint();
  const ComplexMatrix rho = D * rho0 * D.adjoint();
  const ComplexMatrix num = ad * a;
  FockGaussian g;
  g.n = (rho0 * num).trace().real();
  g.m = (rho0 * a * a).trace();
  const double mean = (rho * num).trace().real();
  const double sq = (rho * num * num).trace().real();
  g.fano = (sq - mean * mean) / mean;
  return g;
}

}  // namespace

TEST_CASE("two-mode squeezed vacuum negativity") {
  for (double r : {0.1, 0.5, 1.0}) {
    const RealMatrix c = covariance_matrix(two_mode_squeezed(r));
    CHECK(logarithmic_negativity(c) == doctest::Approx(2.0 * r).epsilon(1e-12));
    const RealVector nu = symplectic_eigenvalues(c);
    CHECK(nu.minCoeff() == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("vacuum covariance") {
  CorrelationTable c(3);
  for (int k = 0; k < 4; ++k) {
    const int ann = k == 0 ? Layout::a() : Layout(3).b(k - 1);
    const int cre = k == 0 ? Layout::ad() : Layout(3).bd(k - 1);
    c.moments(ann, cre) = 1.0;
  }
  const RealMatrix cov = covariance_matrix(c);
  CHECK((cov - 0.5 * RealMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(logarithmic_negativity(cov) < 1e-14);
  // Undamped modes without noise carry all-zero moments and still read as vacuum.
  CHECK((covariance_matrix(CorrelationTable(3)) - cov).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("covariance input checks") {
  RealMatrix c = 0.5 * RealMatrix::Identity(4, 4);
  c(0, 1) = 0.3;
  CHECK_THROWS_AS(logarithmic_negativity(c), Error);
  CHECK_THROWS_AS(symplectic_eigenvalues(RealMatrix::Identity(3, 3)), Error);
  RealMatrix n = 0.5 * RealMatrix::Identity(4, 4);
  n(2, 2) = NAN;
  CHECK_THROWS_AS(logarithmic_negativity(n), Error);
}

TEST_CASE("Fano factor against a Fock-space Gaussian state") {
  const struct {
    Complex A, zeta;
    double nth;
  } cases[] = {{{1.5, 0.0}, {0.3, 0.0}, 0.2},
               {{0.7, 0.4}, {0.2, -0.25}, 0.5},
               {{0.0, 0.0}, {0.4, 0.0}, 0.1},
               {{3.0, 0.0}, {0.0, 0.0}, 1.0}};
  for (const auto& c : cases) {
    const FockGaussian g = fock_gaussian(c.A, c.zeta, c.nth, 140);
    const double nc = 400.0;
    const FanoResult f = fano_from_moments(nc, c.A / std::sqrt(nc), g.n, g.m);
    CHECK(f.value == doctest::Approx(g.fano).epsilon(1e-9));
    CHECK_FALSE(f.vacuum_limit);
  }
}

TEST_CASE("Fano factor limits") {
  const FanoResult vac = fano_from_moments(1000.0, 0.0, 0.0, 0.0);
  CHECK(vac.vacuum_limit);
  CHECK(vac.value == 1.0);
  CHECK(std::isnan(vac.truncated));
  // Coherent state is Poissonian.
  const FanoResult coh = fano_from_moments(1000.0, 0.1, 0.0, 0.0);
  CHECK(coh.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(coh.truncated == doctest::Approx(1.0).epsilon(1e-14));
  // Thermal light has F = 1 + n.
  const FanoResult th = fano_from_moments(1000.0, 0.0, 2.5, 0.0);
  CHECK(th.value == doctest::Approx(3.5).epsilon(1e-14));
}

TEST_CASE("mode labels at zero pump") {
  const SteadyState s = solve(reference_params(1000.0, 0.0), SolverConfig{});
  const Spectrum sp = excitation_spectrum({&s}, {0.0});
  CHECK(std::abs(sp.branch("omega_cav").values[0] - Complex(2.0, -2.0)) < 1e-10);
  CHECK(std::abs(sp.branch("omega1").values[0] - Complex(1.0, 0.0)) < 1e-10);
  CHECK(std::abs(sp.branch("omega2").values[0] - Complex(4.0, 0.0)) < 1e-10);
}

TEST_CASE("soft mode slows down towards y_c") {
  ModelParams p;
  p.atom_number = 1e4;
  const auto branch = solve_branch(p, SolverConfig{}, {0.0, 0.5, 1.0, 1.5, 1.8, 1.9});
  std::vector<const SteadyState*> states;
  std::vector<double> ys;
  for (const auto& b : branch) {
    REQUIRE(b.state);
    states.push_back(&*b.state);
    ys.push_back(b.y);
  }
  const Spectrum sp = excitation_spectrum(states, ys);
  const auto& w1 = sp.branch("omega1").values;
  CHECK(w1.front().real() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < w1.size(); ++i) CHECK(w1[i].real() < w1[i - 1].real() + 1e-12);
}

TEST_CASE("observable set at a superradiant point") {
  SolverConfig bog;
  bog.mode = SolverMode::Bogoliubov;
  const ModelParams p = reference_params(1e4, 2.6);
  const SteadyState seed = solve(p, bog);
  const SteadyState s = solve(p, SolverConfig{}, &seed.iterate);
  const ObservableSet o = compute_observables(s);
  CHECK(o.photons.coherent > 100.0);
  CHECK(o.photons.incoherent > 0.0);
  CHECK(o.condensate_populations.sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (Eigen::Index n = 0; n < o.depletion_populations.size(); ++n) {
    CHECK(o.depletion_populations(n) >= -1e-12);
  }
  CHECK(o.log_negativity >= 0.0);
  CHECK(std::isfinite(o.fano.truncated));
}
