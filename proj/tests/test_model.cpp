#include <doctest.h>

#include <cmath>

#include "dicke/model.hpp"

using namespace dicke;

TEST_CASE("kernels for n_max = 2") {
  const KernelMatrices k = build_kernels(2);
  const double r2 = std::sqrt(2.0);
  RealMatrix m0(3, 3), m1(3, 3), m2(3, 3);
  m0 << 0, 0, 0, 0, 1, 0, 0, 0, 4;
  m1 << 0, 1, 0, 1, 0, 1 / r2, 0, 1 / r2, 0;
  m2 << 2, 0, r2, 0, 3, 0, r2, 0, 2;
  CHECK((k.m0 - m0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((k.m1 - m1).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((k.m2 - m2).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("kernels are symmetric and banded for every supported cutoff") {
  for (int n = 1; n <= kMaxModeCutoff; ++n) {
    const KernelMatrices k = build_kernels(n);
    REQUIRE(k.size() == n + 1);
    CHECK(k.m0 == k.m0.transpose());
    CHECK(k.m1 == k.m1.transpose());
    CHECK(k.m2 == k.m2.transpose());
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        if (i != j) CHECK(k.m0(i, j) == 0.0);
        if (std::abs(i - j) != 1) CHECK(k.m1(i, j) == 0.0);
        if (std::abs(i - j) == 1 || std::abs(i - j) > 2) CHECK(k.m2(i, j) == 0.0);
      }
    }
  }
  CHECK_THROWS_AS(build_kernels(0), Error);
  CHECK_THROWS_AS(build_kernels(kMaxModeCutoff + 1), Error);
}

TEST_CASE("critical coupling at the reference setup") {
  ModelParams p;
  CHECK(std::abs(critical_coupling(p) - 2.0) / 2.0 < 1e-12);
  p.atom_number = 1e5;
  CHECK(std::abs(critical_coupling(p) - 2.0) / 2.0 < 1e-12);
}

TEST_CASE("critical coupling grows with kappa") {
  ModelParams p;
  double previous = 0.0;
  for (double kappa = 0.0; kappa <= 10.0; kappa += 0.25) {
    p.loss_half_rate = kappa;
    const double yc = critical_coupling(p);
    CHECK(yc > previous);
    previous = yc;
  }
}

TEST_CASE("no transition without a positive shifted detuning") {
  ModelParams p;
  p.cavity_detuning = 1.0;
  try {
    critical_coupling(p);
    FAIL("expected NoTransition");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoTransition);
  }
  p.cavity_detuning = -2.0;
  p.light_shift = -4.0 / p.atom_number;  // delta_C = 2 - 2 = 0
  CHECK_THROWS_AS(critical_coupling(p), Error);
}

TEST_CASE("couplings scale with the condensate number") {
  ModelParams p;
  p.pump_amplitude = 0.3;
  p.light_shift = -0.01;
  const Couplings a = couplings(p, 100.0);
  const Couplings b = couplings(p, 400.0);
  CHECK(b.y == doctest::Approx(2.0 * a.y).epsilon(1e-14));
  CHECK(b.u == doctest::Approx(4.0 * a.u).epsilon(1e-14));
  CHECK(a.y == doctest::Approx(std::sqrt(200.0) * 0.3).epsilon(1e-14));
  CHECK_THROWS_AS(couplings(p, 0.0), Error);
}

TEST_CASE("nominal coupling round trip") {
  ModelParams p;
  p.atom_number = 12345.0;
  const ModelParams q = p.with_nominal_coupling(1.7);
  CHECK(q.nominal_coupling() == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(q.pump_amplitude == doctest::Approx(1.7 / std::sqrt(2.0 * 12345.0)).epsilon(1e-15));
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  auto bad = [](auto mutate) {
    ModelParams q;
    mutate(q);
    CHECK_THROWS_AS(q.validate(), Error);
  };
  bad([](ModelParams& q) { q.atom_number = 1.0; });
  bad([](ModelParams& q) { q.recoil_frequency = 0.0; });
  bad([](ModelParams& q) { q.loss_half_rate = -1.0; });
  bad([](ModelParams& q) { q.mode_cutoff = 0; });
  bad([](ModelParams& q) { q.pump_amplitude = NAN; });
}
