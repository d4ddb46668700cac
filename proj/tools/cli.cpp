#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "dicke/io.hpp"

namespace dicke::cli {

using nlohmann::json;

namespace {

Error field_error(const std::string& key, const std::string& what) {
  return Error(ErrorKind::InvalidArgument, "config field '" + key + "': " + what);
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw field_error(key, "expected a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& key) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw field_error(key, "expected an integer");
  return v.get<long long>();
}

int as_int(const json& v, const std::string& key) {
  const long long x = as_integer(v, key);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw field_error(key, "integer out of range");
  }
  return static_cast<int>(x);
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw field_error(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_numbers(const json& v, const std::string& key) {
  if (!v.is_array()) throw field_error(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(as_number(e, key));
  return out;
}

SolverMode parse_mode(const std::string& s, const std::string& key) {
  if (s == "hfb") return SolverMode::HFB;
  if (s == "bogoliubov") return SolverMode::Bogoliubov;
  throw field_error(key, "expected \"hfb\" or \"bogoliubov\", got \"" + s + "\"");
}

void write_json(std::ostream& os, const nlohmann::ordered_json& doc) { os << doc.dump(2) << '\n'; }

int numeric_failure(std::ostream& log, const std::string& what) {
  log << "error: " << what << '\n';
  return 2;
}

void log_physicality(std::ostream& log, double y, const ObservableSet& obs) {
  if (obs.min_symplectic_eigenvalue < 0.5 - 1e-6) {
    log << "warning: y=" << format_double(y)
        << " symplectic eigenvalue " << format_double(obs.min_symplectic_eigenvalue)
        << " below 1/2\n";
  }
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");
  RunConfig c;
  std::optional<double> y_min, y_max;
  std::optional<int> y_points;
  bool have_values = false;

  using Setter = std::function<void(const json&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"atom_number", [&](const json& v, const std::string& k) { c.params.atom_number = as_number(v, k); }},
      {"recoil_frequency", [&](const json& v, const std::string& k) { c.params.recoil_frequency = as_number(v, k); }},
      {"cavity_detuning", [&](const json& v, const std::string& k) { c.params.cavity_detuning = as_number(v, k); }},
      {"loss_half_rate", [&](const json& v, const std::string& k) { c.params.loss_half_rate = as_number(v, k); }},
      {"light_shift", [&](const json& v, const std::string& k) { c.params.light_shift = as_number(v, k); }},
      {"pump_amplitude", [&](const json& v, const std::string& k) { c.params.pump_amplitude = as_number(v, k); }},
      {"mode_cutoff", [&](const json& v, const std::string& k) { c.params.mode_cutoff = as_int(v, k); }},
      {"coupling", [&](const json& v, const std::string& k) { c.coupling = as_number(v, k); }},

      {"mode", [&](const json& v, const std::string& k) { c.solver.mode = parse_mode(as_string(v, k), k); }},
      {"max_iterations", [&](const json& v, const std::string& k) { c.solver.max_iterations = as_int(v, k); }},
      {"alpha_tolerance", [&](const json& v, const std::string& k) { c.solver.alpha_tolerance = as_number(v, k); }},
      {"correlation_tolerance", [&](const json& v, const std::string& k) { c.solver.correlation_tolerance = as_number(v, k); }},
      {"mixing", [&](const json& v, const std::string& k) { c.solver.mixing = as_number(v, k); }},
      {"reduced_mixing", [&](const json& v, const std::string& k) { c.solver.reduced_mixing = as_number(v, k); }},
      {"increases_before_reduction", [&](const json& v, const std::string& k) { c.solver.increases_before_reduction = as_int(v, k); }},
      {"init", [&](const json& v, const std::string& k) {
         const std::string s = as_string(v, k);
         if (s == "deterministic") c.solver.init = InitKind::Deterministic;
         else if (s == "random") c.solver.init = InitKind::Random;
         else throw field_error(k, "expected \"deterministic\" or \"random\"");
       }},
      {"seed", [&](const json& v, const std::string& k) {
         if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
           throw field_error(k, "expected a non-negative integer");
         }
         c.solver.seed = v.get<std::uint64_t>();
       }},
      {"guard", [&](const json& v, const std::string& k) { c.solver.guard = as_number(v, k); }},
      {"initial_alpha", [&](const json& v, const std::string& k) { c.solver.initial_alpha = as_number(v, k); }},
      {"anderson_depth", [&](const json& v, const std::string& k) { c.solver.anderson_depth = as_int(v, k); }},
      {"min_condensate_fraction", [&](const json& v, const std::string& k) { c.solver.min_condensate_fraction = as_number(v, k); }},
      {"stability_tolerance", [&](const json& v, const std::string& k) { c.solver.stability_tolerance = as_number(v, k); }},

      {"y_values", [&](const json& v, const std::string& k) { c.y_values = as_numbers(v, k); have_values = true; }},
      {"y_min", [&](const json& v, const std::string& k) { y_min = as_number(v, k); }},
      {"y_max", [&](const json& v, const std::string& k) { y_max = as_number(v, k); }},
      {"y_points", [&](const json& v, const std::string& k) { y_points = as_int(v, k); }},

      {"atom_numbers", [&](const json& v, const std::string& k) { c.atom_numbers = as_numbers(v, k); }},
      {"y_lo_factor", [&](const json& v, const std::string& k) { c.scaling.y_lo_factor = as_number(v, k); }},
      {"y_hi_factor", [&](const json& v, const std::string& k) { c.scaling.y_hi_factor = as_number(v, k); }},
      {"grid_points", [&](const json& v, const std::string& k) { c.scaling.grid_points = as_int(v, k); }},
      {"discard_below", [&](const json& v, const std::string& k) { c.scaling.discard_below = as_number(v, k); }},
      {"sweep_csv_prefix", [&](const json& v, const std::string& k) { c.sweep_csv_prefix = as_string(v, k); }},

      {"window_lo", [&](const json& v, const std::string& k) { c.window_lo = as_number(v, k); }},
      {"window_hi", [&](const json& v, const std::string& k) { c.window_hi = as_number(v, k); }},
      {"collapse_points", [&](const json& v, const std::string& k) { c.collapse_points = as_int(v, k); }},
      {"epsilon_min", [&](const json& v, const std::string& k) { c.epsilon_min = as_number(v, k); }},
      {"epsilon_max", [&](const json& v, const std::string& k) { c.epsilon_max = as_number(v, k); }},
      {"synthetic", [&](const json& v, const std::string& k) {
         if (!v.is_boolean()) throw field_error(k, "expected true or false");
         c.synthetic = v.get<bool>();
       }},
      {"synthetic_epsilon", [&](const json& v, const std::string& k) { c.synthetic_epsilon = as_number(v, k); }},
  };

  for (const auto& [key, value] : doc.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw field_error(key, "unknown field");
    it->second(value, key);
  }

  const bool have_range = y_min || y_max || y_points;
  if (have_values && have_range) {
    throw field_error("y_values", "give either y_values or y_min/y_max/y_points, not both");
  }
  if (have_range) {
    if (!y_min || !y_max || !y_points) {
      throw field_error(!y_min ? "y_min" : !y_max ? "y_max" : "y_points",
                        "y_min, y_max and y_points must be given together");
    }
    if (*y_points < 1) throw field_error("y_points", "must be >= 1");
    if (*y_points > 1 && !(*y_min < *y_max)) throw field_error("y_max", "must exceed y_min");
    c.y_values = linspace(*y_min, *y_max, *y_points);
  }
  if (c.coupling && doc.contains("pump_amplitude")) {
    throw field_error("coupling", "give either coupling or pump_amplitude, not both");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, path + ": " + e.what());
  }
  return parse_config(doc);
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const ModelParams p = cfg.coupling ? cfg.params.with_nominal_coupling(*cfg.coupling) : cfg.params;
  const SteadyState s = solve(p, cfg.solver);
  const auto doc = solve_document(s, cfg.solver);
  write_json(out, doc);
  if (!s.converged) return numeric_failure(log, "not converged after max_iterations");
  if (s.moment_imag > kMomentImagWarning) {
    log << "warning: imaginary part " << format_double(s.moment_imag) << " in real moments\n";
  }
  log_physicality(log, p.nominal_coupling(), compute_observables(s));
  return 0;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.y_values.empty()) {
    throw field_error("y_values", "sweep needs y_values or y_min/y_max/y_points");
  }
  const SweepResult sw = sweep(cfg.params, cfg.solver, cfg.y_values);
  write_sweep_csv(out, sw);
  int ok = 0;
  for (const auto& p : sw.points) {
    if (p.converged) {
      ++ok;
      log_physicality(log, p.y, p.obs);
    } else {
      log << "warning: y=" << format_double(p.y) << " failed: " << p.error << '\n';
    }
  }
  if (!sw.spectrum_tracked) log << "warning: branch tracking ambiguous; labels assigned per point\n";
  if (ok == 0) return numeric_failure(log, "no grid point converged");
  return 0;
}

int cmd_scaling(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const ExponentTable table = exponent_table(cfg.params, cfg.solver, cfg.atom_numbers, cfg.scaling);
  write_json(out, scaling_document(table, cfg.solver));
  if (!cfg.sweep_csv_prefix.empty()) {
    for (std::size_t i = 0; i < table.sweeps.size(); ++i) {
      const std::string path = cfg.sweep_csv_prefix + "N" + format_double(cfg.atom_numbers[i]) + ".csv";
      std::ofstream f(path);
      if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
      write_sweep_csv(f, table.sweeps[i]);
    }
  }
  int missing = 0;
  for (const auto& r : table.rows) {
    if (!r.fitted) {
      ++missing;
      log << "error: row '" << r.quantity << " " << r.property << "' not fitted: " << r.note << '\n';
    }
  }
  for (const auto& p : table.peaks) {
    if (!p.ok) {
      log << "warning: N=" << format_double(p.atom_number) << " " << quantity_name(p.quantity)
          << ": " << p.error << '\n';
    }
  }
  return missing > 0 ? 2 : 0;
}

int cmd_collapse(const RunConfig& cfg, std::ostream* csv_out, std::ostream& score_out,
                 std::ostream& log) {
  CollapseResult res;
  if (cfg.synthetic) {
    const std::vector<double> ns =
        cfg.atom_numbers.empty() ? std::vector<double>{1e2, 1e3, 1e4, 1e5} : cfg.atom_numbers;
    res = fit_collapse(synthetic_collapse_curves(ns, cfg.synthetic_epsilon), cfg.epsilon_min,
                       cfg.epsilon_max);
  } else {
    if (!std::isfinite(cfg.window_lo) || !std::isfinite(cfg.window_hi)) {
      throw field_error("window_lo", "collapse needs window_lo and window_hi");
    }
    res = scaling_collapse(cfg.params, cfg.solver, cfg.atom_numbers, cfg.window_lo, cfg.window_hi,
                           cfg.collapse_points, cfg.scaling.jobs);
  }
  if (csv_out) write_collapse_csv(*csv_out, res);
  write_json(score_out, collapse_document(res));
  if (!std::isfinite(res.score)) return numeric_failure(log, "rescaled curves do not overlap");
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Steady states of the open Dicke model with HFB fluctuations"};
  app.require_subcommand(1);
  std::string config_path, out_path, mode;
  int jobs = 1;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat JSON run configuration")->required();
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--jobs", jobs, "parallel independent solves")->check(CLI::PositiveNumber);
    sub->add_option("--mode", mode, "hfb or bogoliubov (overrides the config)")
        ->check(CLI::IsMember({"hfb", "bogoliubov"}));
    sub->add_option("--seed", seed, "RNG seed for random initial iterates");
  };
  CLI::App* solve_cmd = app.add_subcommand("solve", "one steady state, JSON output");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "coupling sweep, CSV output");
  CLI::App* scaling_cmd = app.add_subcommand("scaling", "finite-size exponent table, JSON output");
  CLI::App* collapse_cmd = app.add_subcommand("collapse", "scaling collapse of |Im omega1|");
  for (CLI::App* sub : {solve_cmd, sweep_cmd, scaling_cmd, collapse_cmd}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!mode.empty()) cfg.solver.mode = parse_mode(mode, "--mode");
    if (seed) cfg.solver.seed = *seed;
    cfg.scaling.jobs = jobs;
    cfg.params.validate();
    cfg.solver.validate();

    std::ofstream file;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write '" + out_path + "'");
    }
    std::ostream& out = out_path.empty() ? std::cout : file;

    if (solve_cmd->parsed()) return cmd_solve(cfg, out, std::cerr);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, out, std::cerr);
    if (scaling_cmd->parsed()) return cmd_scaling(cfg, out, std::cerr);
    if (out_path.empty()) return cmd_collapse(cfg, nullptr, std::cout, std::cerr);
    std::ofstream score(out_path + ".json");
    if (!score) throw Error(ErrorKind::InvalidArgument, "cannot write '" + out_path + ".json'");
    return cmd_collapse(cfg, &out, score, std::cerr);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.is_input_error() ? 1 : 2;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace dicke::cli
