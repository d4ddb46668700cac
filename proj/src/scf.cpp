#include "dicke/scf.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace dicke {

void SolverConfig::validate() const {
  require(max_iterations > 0, "max_iterations must be > 0");
  require(alpha_tolerance > 0.0 && correlation_tolerance > 0.0, "tolerances must be > 0");
  require(mixing > 0.0 && mixing <= 1.0, "mixing must lie in (0, 1]");
  require(reduced_mixing > 0.0 && reduced_mixing <= 1.0, "reduced_mixing must lie in (0, 1]");
  require(increases_before_reduction > 0, "increases_before_reduction must be > 0");
  require(guard > 0.0, "guard must be > 0");
  require(anderson_depth >= 0, "anderson_depth must be >= 0");
  require(min_condensate_fraction > 0.0 && min_condensate_fraction < 1.0,
          "min_condensate_fraction must lie in (0, 1)");
  require(stability_tolerance >= 0.0, "stability_tolerance must be >= 0");
  require(std::isfinite(initial_alpha), "initial_alpha must be finite");
}

namespace {

ComplexMatrix block_transform(const RealMatrix& O) {
  const int d = static_cast<int>(O.rows());
  const Layout lay(d);
  ComplexMatrix t = ComplexMatrix::Zero(lay.size(), lay.size());
  t(0, 0) = 1.0;
  t(1, 1) = 1.0;
  t.block(2, 2, d, d) = O.cast<Complex>();
  t.block(2 + d, 2 + d, d, d) = O.cast<Complex>();
  return t;
}

// Signs of (a, a+, c_n, c_n+) under the Z2 map.
Eigen::VectorXd z2_signs(int d) {
  const Layout lay(d);
  Eigen::VectorXd s(lay.size());
  s(0) = s(1) = -1.0;
  for (int n = 0; n < d; ++n) s(lay.b(n)) = s(lay.bd(n)) = (n % 2 == 0) ? 1.0 : -1.0;
  return s;
}

Eigen::VectorXd parity(int d) {
  Eigen::VectorXd p(d);
  for (int n = 0; n < d; ++n) p(n) = (n % 2 == 0) ? 1.0 : -1.0;
  return p;
}

RealVector pack(const Iterate& x) {
  const Eigen::Index d = x.gamma.size();
  const Eigen::Index s = x.fourier_moments.size();
  RealVector v(2 + 2 * d + 2 * s);
  v(0) = x.alpha.real();
  v(1) = x.alpha.imag();
  v.segment(2, d) = x.gamma.real();
  v.segment(2 + d, d) = x.gamma.imag();
  const Eigen::Map<const ComplexVector> m(x.fourier_moments.data(), s);
  v.segment(2 + 2 * d, s) = m.real();
  v.segment(2 + 2 * d + s, s) = m.imag();
  return v;
}

Iterate unpack(const RealVector& v, int d) {
  const int n = Layout(d).size();
  const Eigen::Index s = static_cast<Eigen::Index>(n) * n;
  Iterate x;
  x.alpha = Complex(v(0), v(1));
  x.gamma = v.segment(2, d).cast<Complex>() + Complex(0.0, 1.0) * v.segment(2 + d, d).cast<Complex>();
  x.fourier_moments.resize(n, n);
  Eigen::Map<ComplexVector> m(x.fourier_moments.data(), s);
  m = v.segment(2 + 2 * d, s).cast<Complex>() +
      Complex(0.0, 1.0) * v.segment(2 + 2 * d + s, s).cast<Complex>();
  const double norm = x.gamma.norm();
  if (norm > 0.0) x.gamma /= norm;
  return x;
}

/// Anderson mixing over the packed iterate (type II, damped).
class Anderson {
public:
  explicit Anderson(int depth) : depth_(depth) {}

  RealVector step(const RealVector& x, const RealVector& f, double damping) {
    if (has_prev_ && depth_ > 0) {
      dx_.push_back(x - x_prev_);
      df_.push_back(f - f_prev_);
      if (static_cast<int>(dx_.size()) > depth_) {
        dx_.pop_front();
        df_.pop_front();
      }
    }
    x_prev_ = x;
    f_prev_ = f;
    has_prev_ = true;
    if (dx_.empty()) return x + damping * f;

    const Eigen::Index m = static_cast<Eigen::Index>(dx_.size());
    RealMatrix DX(x.size(), m), DF(x.size(), m);
    for (Eigen::Index k = 0; k < m; ++k) {
      DX.col(k) = dx_[k];
      DF.col(k) = df_[k];
    }
    const RealVector theta = DF.completeOrthogonalDecomposition().solve(f);
    if (!theta.allFinite()) {
      reset();
      return x + damping * f;
    }
    return x + damping * f - (DX + damping * DF) * theta;
  }

  void reset() {
    dx_.clear();
    df_.clear();
    has_prev_ = false;
  }

private:
  int depth_;
  std::deque<RealVector> dx_, df_;
  RealVector x_prev_, f_prev_;
  bool has_prev_ = false;
};

bool is_converged(const SteadyState& s, const SolverConfig& c) {
  return s.residual < c.alpha_tolerance && s.beta_residual < 10.0 * c.alpha_tolerance &&
         s.correlation_residual < c.correlation_tolerance;
}

double combined_residual(const SteadyState& s, const SolverConfig& c) {
  return std::max({s.residual / c.alpha_tolerance, s.beta_residual / (10.0 * c.alpha_tolerance),
                   s.correlation_residual / c.correlation_tolerance});
}

constexpr double kFlipThreshold = 1e-8;

void z2_flip_state(SteadyState& s) {
  const int d = static_cast<int>(s.meanfield.beta.size());
  const Eigen::VectorXd p = parity(d);
  MeanFieldState& mf = s.meanfield;
  mf.alpha = -mf.alpha;
  mf.O = p.asDiagonal() * mf.O;
  mf.gamma = p.cast<Complex>().asDiagonal() * mf.gamma;
  mf.mt1 = -mf.mt1;

  Eigen::VectorXd sd = Eigen::VectorXd::Ones(Layout(d).size());
  sd(0) = sd(1) = -1.0;
  const ComplexMatrix S = sd.cast<Complex>().asDiagonal();
  s.corr.moments = S * s.corr.moments * S;
  s.system.F = S * s.system.F * S;
  s.eig.right = S * s.eig.right;
  s.eig.left = S * s.eig.left;
  s.iterate = z2_flip(s.iterate);
}

}  // namespace

ComplexMatrix to_fourier_basis(const ComplexMatrix& decoupled, const RealMatrix& O) {
  const ComplexMatrix t = block_transform(O);
  return t * decoupled * t.transpose();
}

ComplexMatrix to_decoupled_basis(const ComplexMatrix& fourier, const RealMatrix& O) {
  const ComplexMatrix t = block_transform(O);
  return t.transpose() * fourier * t;
}

Iterate z2_flip(const Iterate& x) {
  const int d = static_cast<int>(x.gamma.size());
  const Eigen::VectorXd s = z2_signs(d);
  Iterate y;
  y.alpha = -x.alpha;
  y.gamma = parity(d).cast<Complex>().asDiagonal() * x.gamma;
  const ComplexMatrix S = s.cast<Complex>().asDiagonal();
  y.fourier_moments = S * x.fourier_moments * S;
  return y;
}

Iterate initial_iterate(const ModelParams& params, const SolverConfig& config) {
  const int d = params.atomic_modes();
  Iterate x;
  x.gamma = ComplexVector::Zero(d);
  x.fourier_moments = ComplexMatrix::Zero(Layout(d).size(), Layout(d).size());
  if (config.init == InitKind::Deterministic) {
    x.alpha = Complex(config.initial_alpha, 0.0);
    x.gamma(0) = 1.0;
    return x;
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  x.alpha = Complex(normal(rng), normal(rng));
  for (int n = 0; n < d; ++n) x.gamma(n) = Complex(normal(rng), normal(rng));
  x.gamma /= x.gamma.norm();
  return x;
}

SteadyState evaluate_iterate(const ModelParams& params, const KernelMatrices& kernels,
                             const SolverConfig& config, const Iterate& x) {
  const int d = kernels.size();
  const bool hfb = config.mode == SolverMode::HFB;
  const CorrelationTable zero(d);
  const CorrelationTable fourier(x.fourier_moments);

  SteadyState out;
  out.params = params;
  out.mode = config.mode;
  MeanFieldState& mf = out.meanfield;

  // (1) condensate number and couplings
  mf.condensate_number = hfb ? condensate_number(params.atom_number, fourier,
                                                 config.min_condensate_fraction, &out.clamped)
                             : params.atom_number;
  mf.coupling = couplings(params, mf.condensate_number);
  mf.alpha = x.alpha;

  // (2)-(3) effective matrix and decoupled basis
  apply_decoupling(mf, decouple_atomic_modes(
                           effective_matrix(params, kernels, mf, hfb ? fourier : zero), kernels));
  const CorrelationTable feed =
      hfb ? CorrelationTable(to_decoupled_basis(x.fourier_moments, mf.O)) : zero;

  // (4)-(5) back-action, chemical potential, condensate
  mf.beta = mf.O.cast<Complex>().transpose() * x.gamma;
  const ComplexVector r = back_action_vector(mf, feed);
  mf.mu = chemical_potential(mf, r);
  ComplexVector gamma = mf.O.cast<Complex>() * update_beta(mf.lambda, mf.mu, r, config.guard);
  Eigen::Index top = 0;
  gamma.cwiseAbs().maxCoeff(&top);
  gamma *= std::conj(gamma(top)) / std::abs(gamma(top));
  mf.gamma = gamma;
  mf.beta = mf.O.cast<Complex>().transpose() * gamma;

  // (6) cavity amplitude
  const AlphaUpdate au = update_alpha(params, mf, feed);
  mf.alpha = au.alpha;
  mf.omega = au.omega;

  // (7)-(8) fluctuations
  out.system = assemble_F(params, mf, feed);
  out.eig = bi_orthogonal_eigensystem(out.system.F);
  out.corr = steady_state_correlations(out.eig, out.system.D);

  out.iterate.alpha = mf.alpha;
  out.iterate.gamma = mf.gamma;
  out.iterate.fourier_moments = to_fourier_basis(out.corr.moments, mf.O);

  out.moment_imag = std::max(std::abs(out.corr.photon_number().imag()),
                             out.corr.bd_b().diagonal().imag().cwiseAbs().maxCoeff());

  out.residual = std::abs(mf.alpha - x.alpha);
  out.beta_residual = (mf.gamma - x.gamma).norm();
  out.correlation_residual = (out.iterate.fourier_moments - x.fourier_moments).cwiseAbs().maxCoeff();
  return out;
}

namespace {

SteadyState iterate_to_fixed_point(const ModelParams& params, const SolverConfig& config,
                                   const Iterate* start) {
  const KernelMatrices kernels = build_kernels(params.mode_cutoff);
  const int d = kernels.size();
  const bool hfb = config.mode == SolverMode::HFB;

  Iterate x = start ? *start : initial_iterate(params, config);
  require(x.gamma.size() == d && x.fourier_moments.rows() == Layout(d).size(),
          "start iterate does not match the mode cutoff");
  if (x.alpha.real() < -kFlipThreshold) x = z2_flip(x);

  auto stable = [&](const SteadyState& s) {
    return max_growth_rate(s.eig) <= config.stability_tolerance;
  };

  SteadyState ev = evaluate_iterate(params, kernels, config, x);
  Anderson anderson(config.anderson_depth);
  double mixing = config.mixing;
  int increases = 0;
  double previous = std::numeric_limits<double>::infinity();
  int iterations = 1;

  while (!is_converged(ev, config) && iterations < config.max_iterations) {
    const double res = combined_residual(ev, config);
    if (res > previous && ++increases >= config.increases_before_reduction) {
      mixing = std::min(mixing, config.reduced_mixing);
    }
    previous = res;

    const RealVector xv = pack(x);
    const RealVector f = pack(ev.iterate) - xv;
    const bool was_stable = stable(ev);

    auto attempt = [&](const RealVector& v, Iterate& xn, std::optional<SteadyState>& en) {
      xn = unpack(v, d);
      if (xn.alpha.real() < -kFlipThreshold) {
        xn = z2_flip(xn);
        anderson.reset();
      }
      try {
        en = evaluate_iterate(params, kernels, config, xn);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument) throw;
        en.reset();
        return false;
      }
      ++iterations;
      return !(hfb && was_stable && !stable(*en));
    };

    Iterate xn;
    std::optional<SteadyState> en;
    bool ok = attempt(anderson.step(xv, f, mixing), xn, en);
    // Backtrack along the plain mixing direction when the accelerated step
    // fails or leaves the stable region.
    double lambda = mixing;
    for (int k = 0; !ok && k < 12; ++k) {
      anderson.reset();
      ok = attempt(xv + lambda * f, xn, en);
      lambda *= 0.5;
    }
    if (!ok) {
      if (!en) {
        // Re-raise the evaluation error at the smallest step.
        evaluate_iterate(params, kernels, config, unpack(xv + lambda * f, d));
      }
      throw Error(ErrorKind::UnstableFixedPoint, "iteration cannot leave the unstable region");
    }
    x = std::move(xn);
    ev = std::move(*en);
  }

  ev.iterations = iterations;
  ev.converged = is_converged(ev, config);
  if (ev.meanfield.alpha.real() < 0.0) z2_flip_state(ev);
  return ev;
}

void check_fixed_point(const SteadyState& s, const SolverConfig& config) {
  if (!s.converged) return;
  if (s.clamped) {
    throw Error(ErrorKind::CondensateDepleted, "fixed point requires the condensate floor");
  }
  if (max_growth_rate(s.eig) > config.stability_tolerance) {
    throw Error(ErrorKind::UnstableFixedPoint,
                "converged state has growth rate " + std::to_string(max_growth_rate(s.eig)));
  }
}

}  // namespace

namespace {

constexpr double kSymmetricAlpha = 1e-6;

// Drops the Z2-odd parts of a normal-phase iterate.
Iterate z2_symmetrize(const Iterate& x) {
  const int d = static_cast<int>(x.gamma.size());
  const Eigen::VectorXd s = z2_signs(d);
  const Eigen::VectorXd p = parity(d);
  Iterate y;
  y.alpha = 0.0;
  y.gamma = x.gamma;
  for (int n = 0; n < d; ++n)
    if (p(n) < 0.0) y.gamma(n) = 0.0;
  y.gamma /= y.gamma.norm();
  y.fourier_moments = x.fourier_moments;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    for (Eigen::Index j = 0; j < s.size(); ++j)
      if (s(i) * s(j) < 0.0) y.fourier_moments(i, j) = 0.0;
  return y;
}

// A normal-phase solution stops with |alpha| at the size of the tolerance,
// which couples modes that are exactly decoupled at alpha = 0. Re-converge
// from the symmetric projection and keep it if it stays normal and stable.
SteadyState polish_normal(const ModelParams& params, const SolverConfig& config, SteadyState s) {
  if (!s.converged || std::abs(s.meanfield.alpha) >= kSymmetricAlpha) return s;
  const Iterate sym = z2_symmetrize(s.iterate);
  try {
    SteadyState t = iterate_to_fixed_point(params, config, &sym);
    check_fixed_point(t, config);
    if (t.converged && std::abs(t.meanfield.alpha) <= std::abs(s.meanfield.alpha)) return t;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw;
  }
  return s;
}

}  // namespace

SteadyState solve(const ModelParams& params, const SolverConfig& config, const Iterate* start) {
  params.validate();
  config.validate();
  if (config.anderson_depth == 0) {
    SteadyState s = iterate_to_fixed_point(params, config, start);
    check_fixed_point(s, config);
    return polish_normal(params, config, std::move(s));
  }
  // Anderson mixing also converges onto repelling fixed points of the map,
  // which are typically dynamically unstable; plain mixing cannot land there.
  try {
    SteadyState s = iterate_to_fixed_point(params, config, start);
    check_fixed_point(s, config);
    if (s.converged) return polish_normal(params, config, std::move(s));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw;
  }
  SolverConfig plain = config;
  plain.anderson_depth = 0;
  SteadyState s = iterate_to_fixed_point(params, plain, start);
  check_fixed_point(s, plain);
  return polish_normal(params, plain, std::move(s));
}

std::optional<SteadyState> continue_solve(const ModelParams& params, const SolverConfig& config,
                                          const Iterate& from, double y_from, double y_to,
                                          int depth, std::string* error) {
  try {
    SteadyState s = solve(params.with_nominal_coupling(y_to), config, &from);
    if (s.converged) return s;
    if (error) *error = "not converged from warm start";
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw;
    if (error) *error = e.what();
  }
  if (depth <= 0) return std::nullopt;
  const double mid = 0.5 * (y_from + y_to);
  auto half = continue_solve(params, config, from, y_from, mid, depth - 1, error);
  if (!half) return std::nullopt;
  return continue_solve(params, config, half->iterate, mid, y_to, depth - 1, error);
}

std::vector<BranchPoint> solve_branch(const ModelParams& params, const SolverConfig& config,
                                      const std::vector<double>& y_grid, const Iterate* start) {
  const bool ascending = std::is_sorted(y_grid.begin(), y_grid.end());
  const bool descending = std::is_sorted(y_grid.rbegin(), y_grid.rend());
  require(ascending || descending, "solve_branch: y grid must be monotone");

  std::vector<BranchPoint> out;
  out.reserve(y_grid.size());
  std::optional<Iterate> warm;
  std::optional<double> warm_y;
  if (start) warm = *start;
  for (double y : y_grid) {
    BranchPoint bp;
    bp.y = y;
    std::string warm_error;
    if (warm) {
      const double from = warm_y.value_or(y);
      bp.state = continue_solve(params, config, *warm, from, y,
                                warm_y ? kContinuationDepth : 0, &warm_error);
    }
    if (!bp.state) {
      bp.fallback = warm.has_value();
      try {
        SteadyState s = solve(params.with_nominal_coupling(y), config);
        if (s.converged) bp.state = std::move(s);
        else bp.error = "not converged: max_iterations reached";
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument) throw;
        bp.error = e.what();
      }
      if (!bp.error.empty() && !warm_error.empty()) bp.error = warm_error + "; " + bp.error;
    }
    if (bp.state) {
      warm = bp.state->iterate;
      warm_y = y;
    }
    out.push_back(std::move(bp));
  }
  return out;
}

}  // namespace dicke
