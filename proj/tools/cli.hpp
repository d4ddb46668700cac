#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dicke/analysis.hpp"

namespace dicke::cli {

/// Everything a command needs, resolved from one flat JSON document.
struct RunConfig {
  ModelParams params;
  SolverConfig solver;

  std::optional<double> coupling;  ///< nominal y for `solve`; overrides pump_amplitude

  std::vector<double> y_values;  ///< sweep grid

  std::vector<double> atom_numbers;
  ScalingOptions scaling;
  std::string sweep_csv_prefix;  ///< per-N sweep CSVs from `scaling` when non-empty

  double window_lo = std::numeric_limits<double>::quiet_NaN();
  double window_hi = std::numeric_limits<double>::quiet_NaN();
  int collapse_points = 41;
  double epsilon_min = 0.05;
  double epsilon_max = 1.0;
  bool synthetic = false;
  double synthetic_epsilon = 0.44;
};

/// Throws dicke::Error(InvalidArgument) naming the offending field.
RunConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a config file; syntax errors report line and column.
RunConfig load_config(const std::string& path);

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_scaling(const RunConfig& cfg, std::ostream& out, std::ostream& log);
/// `score_out` receives the JSON score document; may alias nothing (nullptr).
int cmd_collapse(const RunConfig& cfg, std::ostream* csv_out, std::ostream& score_out,
                 std::ostream& log);

/// Full command line handling. Returns the process exit code:
/// 0 success, 1 configuration error, 2 numerical failure.
int run(int argc, char** argv);

}  // namespace dicke::cli
