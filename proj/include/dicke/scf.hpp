#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dicke/fluctuations.hpp"
#include "dicke/meanfield.hpp"

namespace dicke {

enum class SolverMode { HFB, Bogoliubov };
enum class InitKind { Deterministic, Random };

struct SolverConfig {
  SolverMode mode = SolverMode::HFB;
  int max_iterations = 5000;
  double alpha_tolerance = 1e-10;
  double correlation_tolerance = 1e-8;
  double mixing = 0.3;
  double reduced_mixing = 0.1;     ///< used after `increases_before_reduction` residual increases
  int increases_before_reduction = 3;
  InitKind init = InitKind::Deterministic;
  std::uint64_t seed = 0;
  double guard = kDefaultGuard;
  double initial_alpha = 1e-3;
  /// Anderson history length; 0 gives plain linear mixing.
  int anderson_depth = 6;
  double min_condensate_fraction = 1e-3;
  /// Largest Im(omega) accepted for a stable fixed point.
  double stability_tolerance = 1e-9;

  void validate() const;
};

/// Fixed-point variables stored in the Fourier basis, which unlike the
/// decoupled basis does not move between iterations.
struct Iterate {
  Complex alpha{0.0, 0.0};
  ComplexVector gamma;
  ComplexMatrix fourier_moments;  ///< <w_mu w_nu>, w = (a, a+, c_0.., c_0+..)
};

struct SteadyState {
  ModelParams params;
  SolverMode mode = SolverMode::HFB;
  MeanFieldState meanfield;
  FluctuationSystem system;
  EigenSystem eig;
  CorrelationTable corr;  ///< decoupled basis
  Iterate iterate;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;              ///< |alpha change| of the last un-mixed step
  double beta_residual = 0.0;
  double correlation_residual = 0.0;  ///< max |moment change|
  bool clamped = false;               ///< condensate floor was active
  /// Largest |Im| of <a+a> and <b_j+ b_j>, which enter only through their
  /// real parts. Above kMomentImagWarning callers should warn.
  double moment_imag = 0.0;
};

inline constexpr double kMomentImagWarning = 1e-8;

/// Rotates decoupled-basis moments into the Fourier basis and back.
ComplexMatrix to_fourier_basis(const ComplexMatrix& decoupled, const RealMatrix& O);
ComplexMatrix to_decoupled_basis(const ComplexMatrix& fourier, const RealMatrix& O);

/// Applies the Z2 map (alpha, odd Fourier components) -> -(...).
Iterate z2_flip(const Iterate& x);

Iterate initial_iterate(const ModelParams& params, const SolverConfig& config);

/// One un-mixed pass of the self-consistency loop from `x`.
SteadyState evaluate_iterate(const ModelParams& params, const KernelMatrices& kernels,
                             const SolverConfig& config, const Iterate& x);

/// Self-consistent steady state. Hitting max_iterations returns a state with
/// converged == false. Throws UnstableFixedPoint when the converged point has a
/// growing mode and CondensateDepleted when it needed the N_c floor.
SteadyState solve(const ModelParams& params, const SolverConfig& config,
                  const Iterate* start = nullptr);

inline constexpr int kContinuationDepth = 6;

/// Warm-started solve at nominal coupling `y_to` from an iterate converged at
/// `y_from`. On failure the step is halved recursively up to `depth` levels.
/// Returns nullopt (with a message in `error`) if no stable converged state
/// was reached.
std::optional<SteadyState> continue_solve(const ModelParams& params, const SolverConfig& config,
                                          const Iterate& from, double y_from, double y_to,
                                          int depth = kContinuationDepth,
                                          std::string* error = nullptr);

struct BranchPoint {
  double y = 0.0;
  std::optional<SteadyState> state;
  bool fallback = false;  ///< warm start failed, cold start used
  std::string error;      ///< set when no usable state was produced
};

/// Continuation along a monotone grid of nominal couplings. Each point starts
/// from the previous converged iterate (via continue_solve); failures fall
/// back to a cold start and never abort the sweep.
std::vector<BranchPoint> solve_branch(const ModelParams& params, const SolverConfig& config,
                                      const std::vector<double>& y_grid,
                                      const Iterate* start = nullptr);

}  // namespace dicke
