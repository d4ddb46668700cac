#include "dicke/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace dicke {

std::string_view quantity_name(Quantity q) {
  switch (q) {
    case Quantity::IncoherentPhotons: return "incoherent_photons";
    case Quantity::DepletionMode1: return "pop_c1";
    case Quantity::SoftModeDamping: return "abs_im_omega1";
    case Quantity::Fano: return "fano";
  }
  return "unknown";
}

bool is_minimum(Quantity q) { return q == Quantity::SoftModeDamping; }

double quantity_value(const ObservableSet& obs, Quantity q) {
  switch (q) {
    case Quantity::IncoherentPhotons: return obs.photons.incoherent;
    case Quantity::DepletionMode1:
      return obs.depletion_populations.size() > 1 ? obs.depletion_populations(1) : 0.0;
    case Quantity::SoftModeDamping: return std::abs(obs.soft_mode.imag());
    case Quantity::Fano: return obs.fano.value;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> linspace(double lo, double hi, int points) {
  require(points >= 1, "linspace: need at least one point");
  std::vector<double> v(static_cast<std::size_t>(points));
  if (points == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < points; ++i) v[i] = lo + (hi - lo) * i / (points - 1);
  v.back() = hi;
  return v;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

bool superradiant(const SteadyState& s) {
  return std::norm(s.meanfield.alpha) > kSuperradiantThreshold;
}

void fill_observables(SweepPoint& p, const SteadyState& s) {
  try {
    p.obs = compute_observables(s);
    p.converged = true;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw;
    p.error = e.what();
    p.converged = false;
  }
}

std::optional<SteadyState> cold_solve(const ModelParams& params, const SolverConfig& config,
                                      double y, std::string& error) {
  try {
    SteadyState s = solve(params.with_nominal_coupling(y), config);
    if (s.converged) return s;
    error = "not converged: max_iterations reached";
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw;
    error = e.what();
  }
  return std::nullopt;
}

void assign_spectrum(SweepResult& out, const std::vector<std::optional<SteadyState>>& chosen) {
  std::vector<const SteadyState*> states;
  std::vector<double> ys;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (!chosen[i] || !out.points[i].converged) continue;
    states.push_back(&*chosen[i]);
    ys.push_back(out.points[i].y);
    where.push_back(i);
  }
  if (states.empty()) return;
  auto store = [&](std::size_t i, const Spectrum& sp, std::size_t k) {
    for (const auto& b : sp.branches) {
      if (b.label == "omega_cav") out.points[i].omega_cav = b.values[k];
      else if (b.label == "omega1") out.points[i].omega1 = b.values[k];
      else if (b.label == "omega2") out.points[i].omega2 = b.values[k];
    }
  };
  try {
    const Spectrum sp = excitation_spectrum(states, ys);
    for (std::size_t k = 0; k < where.size(); ++k) store(where[k], sp, k);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BranchAmbiguity) throw;
    out.spectrum_tracked = false;
    for (std::size_t k = 0; k < where.size(); ++k) {
      store(where[k], excitation_spectrum({states[k]}, {ys[k]}), 0);
    }
  }
}

}  // namespace

SweepPoint merged_point(const ModelParams& params, const SolverConfig& config, double y,
                        const std::optional<Iterate>& normal_seed, double normal_y,
                        const std::optional<Iterate>& sr_seed, double sr_y) {
  SweepPoint p;
  p.y = y;
  std::optional<SteadyState> chosen;
  if (sr_seed) {
    auto s = continue_solve(params, config, *sr_seed, sr_y, y);
    if (s && superradiant(*s)) {
      p.sr_seed = s->iterate;
      p.superradiant = true;
      chosen = std::move(s);
    }
  }
  std::optional<SteadyState> normal;
  std::string error;
  if (normal_seed) normal = continue_solve(params, config, *normal_seed, normal_y, y, kContinuationDepth, &error);
  if (!normal) {
    p.fallback = normal_seed.has_value();
    std::string cold_error;
    normal = cold_solve(params, config, y, cold_error);
    if (!normal) error = error.empty() ? cold_error : error + "; " + cold_error;
  }
  if (normal) p.normal_seed = normal->iterate;
  if (!chosen) chosen = std::move(normal);
  if (chosen) fill_observables(p, *chosen);
  else p.error = error;
  return p;
}

SweepResult sweep(const ModelParams& params, const SolverConfig& config,
                  const std::vector<double>& y_grid) {
  require(!y_grid.empty(), "sweep: empty grid");
  require(std::is_sorted(y_grid.begin(), y_grid.end()), "sweep: grid must be ascending");
  params.validate();
  config.validate();

  SweepResult out;
  out.y_values = y_grid;
  out.points.resize(y_grid.size());
  std::vector<std::optional<SteadyState>> chosen(y_grid.size());

  const auto normal = solve_branch(params, config, y_grid);

  // Superradiant pass, downwards from the Bogoliubov solution at the top.
  std::vector<std::optional<SteadyState>> sr(y_grid.size());
  {
    SolverConfig bog = config;
    bog.mode = SolverMode::Bogoliubov;
    std::string error;
    auto seed = cold_solve(params, bog, y_grid.back(), error);
    if (seed && superradiant(*seed)) {
      Iterate from = seed->iterate;
      double from_y = y_grid.back();
      for (std::size_t k = y_grid.size(); k-- > 0;) {
        auto s = continue_solve(params, config, from, from_y, y_grid[k]);
        if (!s || !superradiant(*s)) break;
        from = s->iterate;
        from_y = y_grid[k];
        sr[k] = std::move(s);
      }
    }
  }

  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    SweepPoint& p = out.points[i];
    p.y = y_grid[i];
    p.fallback = normal[i].fallback;
    if (normal[i].state) p.normal_seed = normal[i].state->iterate;
    if (sr[i]) {
      p.sr_seed = sr[i]->iterate;
      p.superradiant = true;
      chosen[i] = std::move(sr[i]);
    } else if (normal[i].state) {
      chosen[i] = normal[i].state;
    }
    if (chosen[i]) fill_observables(p, *chosen[i]);
    else p.error = normal[i].error;
  }
  assign_spectrum(out, chosen);
  return out;
}

GoldenResult golden_section(const std::function<double(double)>& f, double a, double b,
                            double rel_tol, bool maximize) {
  require(a < b, "golden_section: need a < b");
  require(rel_tol > 0.0, "golden_section: tolerance must be > 0");
  const double sign = maximize ? 1.0 : -1.0;
  int evals = 0;
  auto g = [&](double x) {
    ++evals;
    const double v = f(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : sign * v;
  };
  const double ga = g(a);
  const double gb = g(b);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = a, hi = b;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double g1 = g(x1), g2 = g(x2);
  double best_x = g1 >= g2 ? x1 : x2;
  double best_g = std::max(g1, g2);
  const double scale = std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
  while (hi - lo > rel_tol * scale) {
    if (g1 >= g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - r * (hi - lo);
      g1 = g(x1);
      if (g1 > best_g) best_g = g1, best_x = x1;
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + r * (hi - lo);
      g2 = g(x2);
      if (g2 > best_g) best_g = g2, best_x = x2;
    }
  }
  const double edge = rel_tol * scale;
  if (!(best_g > ga && best_g > gb) || best_x - a <= edge || b - best_x <= edge) {
    throw Error(ErrorKind::NoInteriorExtremum, "extremum lies on the bracket boundary");
  }
  return {best_x, sign * best_g, evals};
}

PeakEstimate refine_peak(const ModelParams& params, const SolverConfig& config, Quantity q,
                         const PeakBracket& bracket, double rel_tol) {
  require(bracket.lo < bracket.hi, "refine_peak: empty bracket");
  auto value = [&](double y) {
    const SweepPoint p =
        merged_point(params, config, y, bracket.normal_seed, bracket.lo, bracket.sr_seed, bracket.hi);
    return p.converged ? quantity_value(p.obs, q) : std::numeric_limits<double>::quiet_NaN();
  };
  const GoldenResult g = golden_section(value, bracket.lo, bracket.hi, rel_tol, !is_minimum(q));
  return {g.x, g.value};
}

PeakEstimate locate_peak(const ModelParams& params, const SolverConfig& config, Quantity q,
                         const SweepResult& sweep, double rel_tol) {
  const auto& pts = sweep.points;
  int best = -1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i].converged) continue;
    const double v = quantity_value(pts[i].obs, q);
    if (!std::isfinite(v)) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const double bv = quantity_value(pts[best].obs, q);
    if (is_minimum(q) ? v < bv : v > bv) best = static_cast<int>(i);
  }
  if (best < 0) throw Error(ErrorKind::InsufficientData, "no converged sweep points");
  if (best == 0 || best + 1 == static_cast<int>(pts.size())) {
    throw Error(ErrorKind::NoInteriorExtremum,
                std::string(quantity_name(q)) + " extremum at the grid boundary");
  }
  PeakBracket br;
  br.lo = pts[best - 1].y;
  br.hi = pts[best + 1].y;
  br.normal_seed = pts[best - 1].normal_seed;
  br.sr_seed = pts[best + 1].sr_seed;
  return refine_peak(params, config, q, br, rel_tol);
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& v) {
  require(x.size() == v.size(), "fit_power_law: size mismatch");
  if (x.size() < 3) throw Error(ErrorKind::InsufficientData, "fit_power_law: need >= 3 points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), lv(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(x[i]) && std::isfinite(v[i]) && x[i] > 0.0 && v[i] > 0.0,
            "fit_power_law: data must be finite and strictly positive");
    lx[i] = std::log(x[i]);
    lv[i] = std::log(v[i]);
  }
  double mx = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += lx[i], mv += lv[i];
  mx /= n;
  mv /= n;
  double sxx = 0.0, sxv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxv += (lx[i] - mx) * (lv[i] - mv);
  }
  require(sxx > 0.0, "fit_power_law: x values must not all coincide");
  PowerLawFit fit;
  fit.exponent = sxv / sxx;
  fit.intercept = mv - fit.exponent * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = lv[i] - fit.intercept - fit.exponent * lx[i];
    ssr += r * r;
  }
  fit.stderr_exponent = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return fit;
}

ExponentTable exponent_table(const ModelParams& params, const SolverConfig& config,
                             const std::vector<double>& atom_numbers,
                             const ScalingOptions& options) {
  require(std::is_sorted(atom_numbers.begin(), atom_numbers.end()),
          "exponent_table: atom numbers must be ascending");
  require(atom_numbers.size() >= 4, "exponent_table: need at least 4 atom numbers");
  const auto kept = std::count_if(atom_numbers.begin(), atom_numbers.end(),
                                  [&](double n) { return n >= options.discard_below; });
  if (kept < 3) {
    throw Error(ErrorKind::InsufficientData,
                "exponent_table: fewer than 3 atom numbers remain after the discard cut");
  }
  require(options.grid_points >= 5, "exponent_table: grid needs at least 5 points");
  require(options.y_lo_factor < 1.0 && options.y_hi_factor > 1.0,
          "exponent_table: grid must straddle y_c");

  ExponentTable table;
  table.critical_coupling = critical_coupling(params);
  const double yc = table.critical_coupling;
  const auto grid = linspace(options.y_lo_factor * yc, options.y_hi_factor * yc, options.grid_points);

  const std::size_t nq = kTableQuantities.size();
  table.sweeps.resize(atom_numbers.size());
  table.peaks.resize(atom_numbers.size() * nq);
  parallel_for(atom_numbers.size(), options.jobs, [&](std::size_t i) {
    ModelParams p = params;
    p.atom_number = atom_numbers[i];
    table.sweeps[i] = sweep(p, config, grid);
    for (std::size_t k = 0; k < nq; ++k) {
      PeakRecord& rec = table.peaks[i * nq + k];
      rec.atom_number = atom_numbers[i];
      rec.quantity = kTableQuantities[k];
      try {
        const PeakEstimate pk = locate_peak(p, config, rec.quantity, table.sweeps[i]);
        rec.y = pk.y;
        rec.value = pk.value;
        rec.ok = true;
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument) throw;
        rec.error = e.what();
      }
    }
  });

  for (std::size_t k = 0; k < nq; ++k) {
    const Quantity q = kTableQuantities[k];
    ScalingFit height, offset;
    height.quantity = offset.quantity = std::string(quantity_name(q));
    height.property = is_minimum(q) ? "min" : "max";
    offset.property = "offset";
    std::vector<double> ns, hv, ov;
    for (std::size_t i = 0; i < atom_numbers.size(); ++i) {
      const PeakRecord& rec = table.peaks[i * nq + k];
      if (atom_numbers[i] < options.discard_below || !rec.ok) {
        height.discarded.push_back(atom_numbers[i]);
        offset.discarded.push_back(atom_numbers[i]);
        continue;
      }
      ns.push_back(atom_numbers[i]);
      hv.push_back(rec.value);
      ov.push_back(std::abs(rec.y - yc));
      height.peak_values.push_back(rec.value);
      height.peak_locations.push_back(rec.y);
    }
    offset.peak_values = height.peak_values;
    offset.peak_locations = height.peak_locations;
    height.n_values = offset.n_values = ns;
    for (auto* row : {&height, &offset}) {
      const auto& data = row == &height ? hv : ov;
      try {
        const PowerLawFit f = fit_power_law(ns, data);
        row->exponent = f.exponent;
        row->stderr_exponent = f.stderr_exponent;
        row->intercept = f.intercept;
        row->fitted = true;
      } catch (const Error& e) {
        row->note = e.what();
      }
    }
    table.rows.push_back(std::move(height));
    table.rows.push_back(std::move(offset));
  }
  return table;
}

namespace {

// Linear interpolation of (lx, lv) at t; lx ascending.
double interp(const std::vector<double>& lx, const std::vector<double>& lv, double t) {
  auto it = std::lower_bound(lx.begin(), lx.end(), t);
  if (it == lx.begin()) return lv.front();
  if (it == lx.end()) return lv.back();
  const std::size_t j = static_cast<std::size_t>(it - lx.begin());
  if (*it == t) return lv[j];
  const double w = (t - lx[j - 1]) / (lx[j] - lx[j - 1]);
  return lv[j - 1] + w * (lv[j] - lv[j - 1]);
}

struct Rescaled {
  std::vector<double> lx;
  std::vector<double> lv;
};

Rescaled rescale(const CollapseCurve& c, double epsilon) {
  std::vector<std::pair<double, double>> pts;
  const double scale = std::pow(c.atom_number, epsilon);
  for (std::size_t i = 0; i < c.y_tilde.size(); ++i) {
    if (!(c.y_tilde[i] > 0.0) || !(c.damping[i] > 0.0)) continue;
    pts.emplace_back(std::log(scale * c.y_tilde[i]), std::log(c.damping[i] / c.y_tilde[i]));
  }
  std::sort(pts.begin(), pts.end());
  Rescaled r;
  for (const auto& [x, v] : pts) {
    if (!r.lx.empty() && x == r.lx.back()) continue;
    r.lx.push_back(x);
    r.lv.push_back(v);
  }
  return r;
}

double slope(const std::vector<std::pair<double, double>>& pts) {
  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) mx += x, my += y;
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) sxx += (x - mx) * (x - mx), sxy += (x - mx) * (y - my);
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double collapse_score(const std::vector<CollapseCurve>& curves, double epsilon) {
  require(curves.size() >= 2, "collapse_score: need at least two curves");
  std::vector<Rescaled> rs;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& c : curves) {
    rs.push_back(rescale(c, epsilon));
    if (rs.back().lx.size() < 2) return std::numeric_limits<double>::infinity();
    lo = std::max(lo, rs.back().lx.front());
    hi = std::min(hi, rs.back().lx.back());
  }
  if (!(lo < hi)) return std::numeric_limits<double>::infinity();

  std::vector<double> nodes;
  for (const auto& r : rs)
    for (double x : r.lx)
      if (x >= lo && x <= hi) nodes.push_back(x);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  if (nodes.empty()) return std::numeric_limits<double>::infinity();

  double acc = 0.0;
  for (double t : nodes) {
    std::vector<double> v;
    for (const auto& r : rs) v.push_back(std::exp(interp(r.lx, r.lv, t)));
    const double k = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= k;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    acc += var / k / (mean * mean);
  }
  return std::sqrt(acc / static_cast<double>(nodes.size()));
}

CollapseResult fit_collapse(const std::vector<CollapseCurve>& curves, double eps_lo,
                            double eps_hi) {
  require(curves.size() >= 3, "fit_collapse: need at least three curves");
  require(eps_lo < eps_hi, "fit_collapse: empty epsilon range");
  constexpr int kScan = 96;
  const auto scan = linspace(eps_lo, eps_hi, kScan);
  std::size_t best = 0;
  std::vector<double> scores(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) {
    scores[i] = collapse_score(curves, scan[i]);
    if (scores[i] < scores[best]) best = i;
  }
  CollapseResult res;
  res.curves = curves;
  res.epsilon = scan[best];
  res.score = scores[best];
  if (best > 0 && best + 1 < scan.size() && std::isfinite(res.score)) {
    try {
      const GoldenResult g = golden_section([&](double e) { return collapse_score(curves, e); },
                                            scan[best - 1], scan[best + 1], 1e-12, false);
      if (g.value <= res.score) {
        res.epsilon = g.x;
        res.score = g.value;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoInteriorExtremum) throw;
    }
  }

  std::vector<std::pair<double, double>> all;
  for (const auto& c : curves) {
    const Rescaled r = rescale(c, res.epsilon);
    for (std::size_t i = 0; i < r.lx.size(); ++i) all.emplace_back(r.lx[i], r.lv[i]);
  }
  std::sort(all.begin(), all.end());
  const std::size_t fifth = std::max<std::size_t>(2, all.size() / 5);
  if (all.size() >= 2 * fifth) {
    res.small_x_slope = slope({all.begin(), all.begin() + fifth});
    res.large_x_slope = slope({all.end() - fifth, all.end()});
  }
  return res;
}

CollapseResult scaling_collapse(const ModelParams& params, const SolverConfig& config,
                                const std::vector<double>& atom_numbers, double y_lo, double y_hi,
                                int grid_points, int jobs) {
  require(atom_numbers.size() >= 3, "scaling_collapse: need at least 3 atom numbers");
  require(y_lo < y_hi, "scaling_collapse: empty window");
  require(grid_points >= 3, "scaling_collapse: need at least 3 grid points");
  const double yc = critical_coupling(params);
  const double margin = 1e-9 * yc;
  require(y_hi < yc - margin || y_lo > yc + margin,
          "scaling_collapse: window must lie on one side of y_c with a margin");

  const auto grid = linspace(y_lo, y_hi, grid_points);
  std::vector<CollapseCurve> curves(atom_numbers.size());
  parallel_for(atom_numbers.size(), jobs, [&](std::size_t i) {
    ModelParams p = params;
    p.atom_number = atom_numbers[i];
    const SweepResult sw = sweep(p, config, grid);
    CollapseCurve& c = curves[i];
    c.atom_number = atom_numbers[i];
    for (const auto& pt : sw.points) {
      if (!pt.converged) continue;
      c.y_tilde.push_back(std::abs(yc - pt.y) / yc);
      c.damping.push_back(std::abs(pt.obs.soft_mode.imag()));
    }
  });
  return fit_collapse(curves);
}

std::vector<CollapseCurve> synthetic_collapse_curves(const std::vector<double>& atom_numbers,
                                                     double epsilon, int points) {
  require(points >= 2, "synthetic_collapse_curves: need at least 2 points");
  std::vector<CollapseCurve> out;
  for (double n : atom_numbers) {
    CollapseCurve c;
    c.atom_number = n;
    const double scale = std::pow(n, epsilon);
    for (int i = 0; i < points; ++i) {
      const double x = std::pow(10.0, -1.0 + 2.0 * i / (points - 1));
      const double yt = x / scale;
      c.y_tilde.push_back(yt);
      c.damping.push_back(yt / (1.0 + 1.0 / x));
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace dicke
