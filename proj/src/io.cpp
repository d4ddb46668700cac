#include "dicke/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace dicke {

using nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), "not a number: '" + s + "'");
  return v;
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << kSweepHeader << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepPoint& p : sweep.points) {
    const ObservableSet& o = p.obs;
    auto pop = [&](Eigen::Index n) {
      return p.converged && o.depletion_populations.size() > n ? o.depletion_populations(n) : nan;
    };
    auto val = [&](double v) { return p.converged ? v : nan; };
    const double fields[] = {p.y,
                             val(o.photons.coherent),
                             val(o.photons.incoherent),
                             pop(1),
                             pop(2),
                             val(o.fano.value),
                             val(o.log_negativity),
                             p.omega1.real(),
                             p.omega1.imag(),
                             p.omega_cav.real(),
                             p.omega_cav.imag(),
                             p.omega2.real(),
                             p.omega2.imag()};
    for (double f : fields) os << format_double(f) << ',';
    os << (p.converged ? 1 : 0) << '\n';
  }
}

void write_collapse_csv(std::ostream& os, const CollapseResult& result) {
  os << "atom_number,x,phi\n";
  for (const CollapseCurve& c : result.curves) {
    const double scale = std::pow(c.atom_number, result.epsilon);
    for (std::size_t i = 0; i < c.y_tilde.size(); ++i) {
      if (!(c.y_tilde[i] > 0.0)) continue;
      os << format_double(c.atom_number) << ',' << format_double(scale * c.y_tilde[i]) << ','
         << format_double(c.damping[i] / c.y_tilde[i]) << '\n';
    }
  }
}

CsvTable read_csv(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  };
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) return t;
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    require(t.rows.back().size() == t.header.size(),
            "csv row " + std::to_string(t.rows.size()) + " has the wrong field count");
  }
  return t;
}

namespace {

ordered_json cjson(Complex z) { return ordered_json::array({z.real(), z.imag()}); }

ordered_json vec_json(const RealVector& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json vec_json(const ComplexVector& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(cjson(v(i)));
  return a;
}

ordered_json mat_json(const RealMatrix& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(RealVector(m.row(i).transpose())));
  return a;
}

ordered_json mat_json(const ComplexMatrix& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    a.push_back(vec_json(ComplexVector(m.row(i).transpose())));
  }
  return a;
}

ordered_json observables_json(const ObservableSet& o) {
  ordered_json j;
  j["coherent_photons"] = o.photons.coherent;
  j["incoherent_photons"] = o.photons.incoherent;
  j["condensate_populations"] = vec_json(o.condensate_populations);
  j["depletion_populations"] = vec_json(o.depletion_populations);
  j["fano"] = o.fano.value;
  if (std::isfinite(o.fano.truncated)) j["fano_truncated"] = o.fano.truncated;
  else j["fano_truncated"] = nullptr;
  j["fano_vacuum_limit"] = o.fano.vacuum_limit;
  j["log_negativity"] = o.log_negativity;
  j["min_symplectic_eigenvalue"] = o.min_symplectic_eigenvalue;
  j["soft_mode"] = cjson(o.soft_mode);
  ordered_json modes = ordered_json::array();
  for (const auto& m : o.modes) {
    modes.push_back({{"omega", cjson(m.omega)}, {"cavity_weight", m.cavity_weight}});
  }
  j["modes"] = modes;
  return j;
}

ordered_json peak_json(const PeakRecord& r) {
  ordered_json j;
  j["atom_number"] = r.atom_number;
  j["ok"] = r.ok;
  if (r.ok) {
    j["y"] = r.y;
    j["value"] = r.value;
  } else {
    j["error"] = r.error;
  }
  return j;
}

}  // namespace

ordered_json to_json(const ModelParams& p) {
  ordered_json j;
  j["atom_number"] = p.atom_number;
  j["recoil_frequency"] = p.recoil_frequency;
  j["cavity_detuning"] = p.cavity_detuning;
  j["loss_half_rate"] = p.loss_half_rate;
  j["light_shift"] = p.light_shift;
  j["pump_amplitude"] = p.pump_amplitude;
  j["mode_cutoff"] = p.mode_cutoff;
  return j;
}

ordered_json to_json(const SolverConfig& c) {
  ordered_json j;
  j["mode"] = c.mode == SolverMode::HFB ? "hfb" : "bogoliubov";
  j["max_iterations"] = c.max_iterations;
  j["alpha_tolerance"] = c.alpha_tolerance;
  j["correlation_tolerance"] = c.correlation_tolerance;
  j["mixing"] = c.mixing;
  j["reduced_mixing"] = c.reduced_mixing;
  j["increases_before_reduction"] = c.increases_before_reduction;
  j["init"] = c.init == InitKind::Deterministic ? "deterministic" : "random";
  j["seed"] = c.seed;
  j["guard"] = c.guard;
  j["initial_alpha"] = c.initial_alpha;
  j["anderson_depth"] = c.anderson_depth;
  j["min_condensate_fraction"] = c.min_condensate_fraction;
  j["stability_tolerance"] = c.stability_tolerance;
  return j;
}

ordered_json solve_document(const SteadyState& s, const SolverConfig& config) {
  ordered_json doc;
  doc["params"] = to_json(s.params);
  doc["nominal_coupling"] = s.params.nominal_coupling();
  doc["solver"] = to_json(config);
  doc["convergence"] = {{"converged", s.converged},
                        {"iterations", s.iterations},
                        {"alpha_residual", s.residual},
                        {"beta_residual", s.beta_residual},
                        {"correlation_residual", s.correlation_residual},
                        {"clamped", s.clamped},
                        {"moment_imag", s.moment_imag}};
  const MeanFieldState& mf = s.meanfield;
  doc["mean_field"] = {{"alpha", cjson(mf.alpha)},
                       {"gamma", vec_json(mf.gamma)},
                       {"beta", vec_json(mf.beta)},
                       {"condensate_number", mf.condensate_number},
                       {"mu", mf.mu},
                       {"omega", mf.omega},
                       {"lambda", vec_json(mf.lambda)},
                       {"O", mat_json(mf.O)}};
  doc["moments"] = mat_json(s.corr.moments);
  doc["eigenfrequencies"] = vec_json(s.eig.omegas);
  const ObservableSet obs = compute_observables(s);
  doc["observables"] = observables_json(obs);
  // Flat copies of the headline numbers.
  doc["coherent_photons"] = obs.photons.coherent;
  doc["incoherent_photons"] = obs.photons.incoherent;
  doc["converged"] = s.converged;
  return doc;
}

ordered_json scaling_document(const ExponentTable& table, const SolverConfig& config) {
  ordered_json doc;
  doc["critical_coupling"] = table.critical_coupling;
  doc["solver"] = to_json(config);
  ordered_json rows = ordered_json::array();
  for (const ScalingFit& r : table.rows) {
    ordered_json j;
    j["name"] = r.quantity + " " + r.property;
    j["quantity"] = r.quantity;
    j["property"] = r.property;
    j["fitted"] = r.fitted;
    if (r.fitted) {
      j["exponent"] = r.exponent;
      j["stderr"] = r.stderr_exponent;
      j["intercept"] = r.intercept;
    } else {
      j["exponent"] = nullptr;
      j["stderr"] = nullptr;
      j["note"] = r.note;
    }
    j["atom_numbers"] = r.n_values;
    j["discarded"] = r.discarded;
    j["peak_values"] = r.peak_values;
    j["peak_locations"] = r.peak_locations;
    rows.push_back(std::move(j));
  }
  doc["rows"] = rows;
  ordered_json peaks = ordered_json::array();
  for (const PeakRecord& p : table.peaks) {
    ordered_json j = peak_json(p);
    j["quantity"] = std::string(quantity_name(p.quantity));
    peaks.push_back(std::move(j));
  }
  doc["peaks"] = peaks;
  return doc;
}

ordered_json collapse_document(const CollapseResult& r) {
  ordered_json doc;
  doc["epsilon"] = r.epsilon;
  doc["score"] = r.score;
  doc["small_x_slope"] = r.small_x_slope;
  doc["large_x_slope"] = r.large_x_slope;
  ordered_json ns = ordered_json::array();
  for (const auto& c : r.curves) ns.push_back(c.atom_number);
  doc["atom_numbers"] = ns;
  return doc;
}

}  // namespace dicke
