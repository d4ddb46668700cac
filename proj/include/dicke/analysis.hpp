#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dicke/observables.hpp"

namespace dicke {

/// Scalars whose finite-size peaks enter the exponent table.
enum class Quantity { IncoherentPhotons, DepletionMode1, SoftModeDamping, Fano };

inline constexpr std::array<Quantity, 4> kTableQuantities = {
    Quantity::IncoherentPhotons, Quantity::DepletionMode1, Quantity::SoftModeDamping,
    Quantity::Fano};

std::string_view quantity_name(Quantity q);
/// |Im omega1| is minimised; the others are maximised.
bool is_minimum(Quantity q);
double quantity_value(const ObservableSet& obs, Quantity q);

/// States with |alpha|^2 above this count as superradiant.
inline constexpr double kSuperradiantThreshold = 1e-10;

struct SweepPoint {
  double y = 0.0;
  bool converged = false;
  bool superradiant = false;
  bool fallback = false;
  std::string error;
  ObservableSet obs;
  Complex omega_cav{NAN, NAN};
  Complex omega1{NAN, NAN};
  Complex omega2{NAN, NAN};
  std::optional<Iterate> normal_seed;  ///< converged iterate on the ascending pass
  std::optional<Iterate> sr_seed;      ///< converged superradiant iterate, descending pass
};

struct SweepResult {
  std::vector<double> y_values;
  std::vector<SweepPoint> points;
  bool spectrum_tracked = true;  ///< false if branch tracking hit an ambiguity
};

/// Observables along an ascending grid. The normal branch is continued
/// upwards from a cold start; the superradiant branch is continued downwards
/// from the Bogoliubov solution at the top of the grid. Each point reports the
/// superradiant state where it exists and is stable, otherwise the normal one.
/// Point failures are recorded, never thrown.
SweepResult sweep(const ModelParams& params, const SolverConfig& config,
                  const std::vector<double>& y_grid);

/// Evaluates one point of the merged path using warm starts from neighbours.
SweepPoint merged_point(const ModelParams& params, const SolverConfig& config, double y,
                        const std::optional<Iterate>& normal_seed, double normal_y,
                        const std::optional<Iterate>& sr_seed, double sr_y);

struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search on [a, b] to relative x tolerance `rel_tol`.
/// Throws NoInteriorExtremum if the optimum sits on an endpoint.
GoldenResult golden_section(const std::function<double(double)>& f, double a, double b,
                            double rel_tol, bool maximize);

struct PeakBracket {
  double lo = 0.0;
  double hi = 0.0;
  std::optional<Iterate> normal_seed;  ///< converged at lo
  std::optional<Iterate> sr_seed;      ///< converged at hi
};

struct PeakEstimate {
  double y = 0.0;
  double value = 0.0;
};

inline constexpr double kPeakTolerance = 1e-5;

/// Golden-section refinement of `q` along the merged path inside `bracket`.
PeakEstimate refine_peak(const ModelParams& params, const SolverConfig& config, Quantity q,
                         const PeakBracket& bracket, double rel_tol = kPeakTolerance);

/// Grid extremum of `q` in `sweep`, then refine_peak on its two neighbours.
/// Throws NoInteriorExtremum if the grid extremum is at either end.
PeakEstimate locate_peak(const ModelParams& params, const SolverConfig& config, Quantity q,
                         const SweepResult& sweep, double rel_tol = kPeakTolerance);

struct PowerLawFit {
  double exponent = 0.0;
  double stderr_exponent = 0.0;
  double intercept = 0.0;  ///< ln prefactor
};

/// OLS of ln v on ln x. Needs >= 3 strictly positive points.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& v);

struct ScalingFit {
  std::string quantity;
  std::string property;  ///< "max", "min" or "offset"
  double exponent = 0.0;
  double stderr_exponent = 0.0;
  double intercept = 0.0;
  std::vector<double> n_values;
  std::vector<double> discarded;
  std::vector<double> peak_values;
  std::vector<double> peak_locations;
  bool fitted = false;
  std::string note;
};

struct ScalingOptions {
  double y_lo_factor = 0.95;
  double y_hi_factor = 1.2;
  int grid_points = 251;
  double discard_below = 1e3;  ///< N below this are solved but not fitted
  int jobs = 1;
};

struct PeakRecord {
  double atom_number = 0.0;
  Quantity quantity = Quantity::IncoherentPhotons;
  bool ok = false;
  double y = 0.0;
  double value = 0.0;
  std::string error;
};

struct ExponentTable {
  double critical_coupling = 0.0;
  std::vector<ScalingFit> rows;  ///< height then offset for each quantity
  std::vector<PeakRecord> peaks;
  std::vector<SweepResult> sweeps;  ///< one per N, in input order
};

/// Peak heights and |y_peak - y_c| against N for the four table quantities.
/// `atom_numbers` must be ascending with at least 4 entries, at least 3 of
/// which survive the discard cut.
ExponentTable exponent_table(const ModelParams& params, const SolverConfig& config,
                             const std::vector<double>& atom_numbers,
                             const ScalingOptions& options = {});

struct CollapseCurve {
  double atom_number = 0.0;
  std::vector<double> y_tilde;       ///< |y_c - y| / y_c
  std::vector<double> damping;       ///< |Im omega1|
};

/// Normalised spread of |Im omega1| / y~ against N^eps y~ across curves,
/// evaluated on the shared x range by log-log interpolation. +inf when the
/// rescaled curves do not overlap.
double collapse_score(const std::vector<CollapseCurve>& curves, double epsilon);

struct CollapseResult {
  double epsilon = 0.0;
  double score = 0.0;
  double small_x_slope = 0.0;  ///< d ln phi / d ln x on the lowest fifth of x
  double large_x_slope = 0.0;  ///< same on the highest fifth
  std::vector<CollapseCurve> curves;
};

/// Best epsilon in [eps_lo, eps_hi] by golden-section on collapse_score.
CollapseResult fit_collapse(const std::vector<CollapseCurve>& curves, double eps_lo = 0.05,
                            double eps_hi = 1.0);

/// Runs sweeps over the window (one side of y_c only) and fits the collapse.
CollapseResult scaling_collapse(const ModelParams& params, const SolverConfig& config,
                                const std::vector<double>& atom_numbers, double y_lo, double y_hi,
                                int grid_points = 41, int jobs = 1);

/// Curves generated exactly from phi(x) = 1/(1 + 1/x) at exponent `epsilon`.
std::vector<CollapseCurve> synthetic_collapse_curves(const std::vector<double>& atom_numbers,
                                                     double epsilon, int points = 25);

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first exception
/// thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

std::vector<double> linspace(double lo, double hi, int points);

}  // namespace dicke
