#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dicke/io.hpp"

using namespace dicke;

TEST_CASE("shortest round-trip number format") {
  CHECK(format_double(1.0) == "1e+00");
  CHECK(format_double(0.1) == "1e-01");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> ex(-300, 300);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(mant(rng), ex(rng));
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(std::isnan(parse_double("nan")));
  CHECK_THROWS_AS(parse_double("1.0x"), Error);
}

TEST_CASE("sweep CSV header and round trip") {
  ModelParams p;
  p.atom_number = 1000.0;
  const SweepResult sw = sweep(p, SolverConfig{}, linspace(1.9, 2.3, 9));
  std::stringstream ss;
  write_sweep_csv(ss, sw);
  const std::string text = ss.str();
  CHECK(text.substr(0, text.find('\n')) ==
        "y,coherent_photons,incoherent_photons,pop_c1,pop_c2,fano,log_negativity,re_omega1,"
        "im_omega1,re_omega_cav,im_omega_cav,re_omega2,im_omega2,converged");
  const CsvTable t = read_csv(ss);
  REQUIRE(t.rows.size() == sw.points.size());
  REQUIRE(t.header.size() == 14);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const SweepPoint& pt = sw.points[i];
    const auto& r = t.rows[i];
    CHECK(parse_double(r[0]) == pt.y);
    CHECK(parse_double(r[1]) == pt.obs.photons.coherent);
    CHECK(parse_double(r[2]) == pt.obs.photons.incoherent);
    CHECK(parse_double(r[3]) == pt.obs.depletion_populations(1));
    CHECK(parse_double(r[4]) == pt.obs.depletion_populations(2));
    CHECK(parse_double(r[5]) == pt.obs.fano.value);
    CHECK(parse_double(r[6]) == pt.obs.log_negativity);
    CHECK(parse_double(r[7]) == pt.omega1.real());
    CHECK(parse_double(r[8]) == pt.omega1.imag());
    CHECK(parse_double(r[9]) == pt.omega_cav.real());
    CHECK(parse_double(r[10]) == pt.omega_cav.imag());
    CHECK(parse_double(r[11]) == pt.omega2.real());
    CHECK(parse_double(r[12]) == pt.omega2.imag());
    CHECK(r[13] == (pt.converged ? "1" : "0"));
  }
}

TEST_CASE("failed points are written as nan rows") {
  SweepResult sw;
  SweepPoint pt;
  pt.y = 1.5;
  sw.points.push_back(pt);
  std::stringstream ss;
  write_sweep_csv(ss, sw);
  const CsvTable t = read_csv(ss);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0] == "1.5e+00");
  CHECK(t.rows[0][2] == "nan");
  CHECK(t.rows[0][13] == "0");
}

TEST_CASE("collapse CSV round trip") {
  CollapseResult r;
  r.epsilon = 0.44;
  r.curves = synthetic_collapse_curves({1e2, 1e3}, 0.44, 5);
  std::stringstream ss;
  write_collapse_csv(ss, r);
  const CsvTable t = read_csv(ss);
  CHECK(t.header == std::vector<std::string>{"atom_number", "x", "phi"});
  REQUIRE(t.rows.size() == 10);
  const auto& c = r.curves[1];
  CHECK(parse_double(t.rows[5][0]) == 1e3);
  CHECK(parse_double(t.rows[5][1]) == std::pow(1e3, 0.44) * c.y_tilde[0]);
  CHECK(parse_double(t.rows[5][2]) == c.damping[0] / c.y_tilde[0]);
}

TEST_CASE("JSON numbers round trip") {
  ModelParams p;
  p.pump_amplitude = 0.1 + 0.2;
  const auto j = nlohmann::json::parse(to_json(p).dump());
  CHECK(j["pump_amplitude"].get<double>() == p.pump_amplitude);
  CHECK(j["mode_cutoff"].get<int>() == 2);
}
