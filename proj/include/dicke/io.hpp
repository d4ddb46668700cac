#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dicke/analysis.hpp"

namespace dicke {

/// Shortest decimal string that parses back to exactly `v`, in scientific
/// notation. Non-finite values print as nan, inf or -inf.
std::string format_double(double v);

/// Inverse of format_double. Throws InvalidArgument on trailing garbage.
double parse_double(const std::string& s);

inline constexpr const char* kSweepHeader =
    "y,coherent_photons,incoherent_photons,pop_c1,pop_c2,fano,log_negativity,re_omega1,"
    "im_omega1,re_omega_cav,im_omega_cav,re_omega2,im_omega2,converged";

/// One row per grid point. Failed points carry nan observables and converged=0.
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);

/// Rescaled collapse curves: atom_number, N^eps y~, |Im omega1| / y~.
void write_collapse_csv(std::ostream& os, const CollapseResult& result);

/// Splits a comma-separated table into header and rows of fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(std::istream& is);

nlohmann::ordered_json to_json(const ModelParams& params);
nlohmann::ordered_json to_json(const SolverConfig& config);
/// Parameters, convergence record, mean fields, moments and observables.
nlohmann::ordered_json solve_document(const SteadyState& state, const SolverConfig& config);
nlohmann::ordered_json scaling_document(const ExponentTable& table, const SolverConfig& config);
nlohmann::ordered_json collapse_document(const CollapseResult& result);

}  // namespace dicke
