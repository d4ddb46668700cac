#include "dicke/observables.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace dicke {

PhotonSplit photon_split(const SteadyState& state) {
  return {state.meanfield.condensate_number * std::norm(state.meanfield.alpha),
          state.corr.photon_number().real()};
}

RealVector condensate_populations(const SteadyState& state) {
  return state.meanfield.gamma.cwiseAbs2();
}

RealVector depletion_populations(const SteadyState& state) {
  const RealMatrix& O = state.meanfield.O;
  const RealMatrix bdb = state.corr.bd_b().real();
  return (O * bdb * O.transpose()).diagonal();
}

std::vector<ModeCandidate> positive_modes(const SteadyState& state, double tol) {
  const Layout lay(static_cast<int>(state.meanfield.beta.size()));
  const int z = state.system.zero_mode_index;
  std::vector<ModeCandidate> out;
  for (Eigen::Index k = 0; k < state.eig.omegas.size(); ++k) {
    const ComplexVector r = state.eig.right.col(k).normalized();
    const double zero_weight = std::norm(r(lay.b(z))) + std::norm(r(lay.bd(z)));
    if (zero_weight > 0.5) continue;
    const Complex w = state.eig.omegas(k);
    if (w.real() < -tol) continue;
    out.push_back({w, k, std::norm(r(Layout::a())) + std::norm(r(Layout::ad()))});
  }
  std::sort(out.begin(), out.end(), [](const ModeCandidate& a, const ModeCandidate& b) {
    return std::abs(a.omega) < std::abs(b.omega);
  });
  return out;
}

Complex soft_mode(const SteadyState& state) {
  const auto modes = positive_modes(state);
  if (modes.empty()) throw Error(ErrorKind::EigensolverFailure, "no excitation modes");
  return modes.front().omega;
}

const SpectrumBranch& Spectrum::branch(const std::string& label) const {
  for (const auto& b : branches)
    if (b.label == label) return b;
  throw Error(ErrorKind::InvalidArgument, "unknown spectrum branch " + label);
}

namespace {

double overlap(const SteadyState& a, Eigen::Index ka, const SteadyState& b, Eigen::Index kb) {
  const ComplexVector ra = a.eig.right.col(ka).normalized();
  const ComplexVector rb = b.eig.right.col(kb).normalized();
  return std::abs(ra.dot(rb));
}

}  // namespace

Spectrum excitation_spectrum(const std::vector<const SteadyState*>& states,
                             const std::vector<double>& y_values) {
  require(!states.empty(), "excitation_spectrum: no states");
  require(states.size() == y_values.size(), "excitation_spectrum: size mismatch");
  Spectrum sp;
  sp.y = y_values;

  // Labels from the first state.
  auto first = positive_modes(*states.front());
  require(!first.empty(), "excitation_spectrum: first state has no modes");
  const auto cav = std::max_element(first.begin(), first.end(), [](const auto& a, const auto& b) {
    return a.cavity_weight < b.cavity_weight;
  });
  std::vector<ModeCandidate> current;
  current.push_back(*cav);
  sp.branches.push_back({"omega_cav", {}});
  int atomic = 0;
  const int wanted = static_cast<int>(states.front()->meanfield.beta.size()) - 1;
  for (auto it = first.begin(); it != first.end() && atomic < wanted; ++it) {
    if (it == cav) continue;
    current.push_back(*it);
    sp.branches.push_back({"omega" + std::to_string(++atomic), {}});
  }
  for (std::size_t b = 0; b < current.size(); ++b) sp.branches[b].values.push_back(current[b].omega);

  constexpr double kTie = 1e-9;
  for (std::size_t s = 1; s < states.size(); ++s) {
    const auto cand = positive_modes(*states[s]);
    std::vector<bool> used(cand.size(), false);
    for (std::size_t b = 0; b < current.size(); ++b) {
      const Complex prev = current[b].omega;
      int best = -1, second = -1;
      for (std::size_t c = 0; c < cand.size(); ++c) {
        if (used[c]) continue;
        const double dist = std::abs(cand[c].omega - prev);
        if (best < 0 || dist < std::abs(cand[best].omega - prev)) {
          second = best;
          best = static_cast<int>(c);
        } else if (second < 0 || dist < std::abs(cand[second].omega - prev)) {
          second = static_cast<int>(c);
        }
      }
      if (best < 0) throw Error(ErrorKind::BranchAmbiguity, "branch lost: too few modes");
      if (second >= 0) {
        const double d1 = std::abs(cand[best].omega - prev);
        const double d2 = std::abs(cand[second].omega - prev);
        if (d2 - d1 < kTie * std::max(1.0, d2)) {
          const double o1 = overlap(*states[s - 1], current[b].index, *states[s], cand[best].index);
          const double o2 = overlap(*states[s - 1], current[b].index, *states[s], cand[second].index);
          if (std::abs(o1 - o2) < 1e-6) {
            throw Error(ErrorKind::BranchAmbiguity,
                        "two modes equally close to " + sp.branches[b].label);
          }
          if (o2 > o1) std::swap(best, second);
        }
      }
      used[best] = true;
      current[b] = cand[best];
      sp.branches[b].values.push_back(current[b].omega);
    }
  }

  sp.min_abs_im_omega1 = std::numeric_limits<double>::infinity();
  for (const auto& b : sp.branches) {
    if (b.label != "omega1") continue;
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      if (std::abs(b.values[i].imag()) < sp.min_abs_im_omega1) {
        sp.min_abs_im_omega1 = std::abs(b.values[i].imag());
        sp.y_min = sp.y[i];
      }
    }
  }
  return sp;
}

FanoResult fano_from_moments(double condensate_number, Complex alpha, double n, Complex m) {
  FanoResult out;
  const Complex A = std::sqrt(condensate_number) * alpha;
  const double coherent = std::norm(A);
  const double mean = coherent + n;
  out.truncated = coherent > 0.0
                      ? 1.0 + 2.0 * n + 2.0 * (std::conj(alpha) * std::conj(alpha) * m).real() /
                                            std::norm(alpha)
                      : std::numeric_limits<double>::quiet_NaN();
  if (!(std::abs(mean) >= 1e-12)) {
    out.value = 1.0;
    out.vacuum_limit = true;
    return out;
  }
  const double var = coherent * (2.0 * n + 1.0) + 2.0 * (std::conj(A) * std::conj(A) * m).real() +
                     n * n + std::norm(m) + n;
  out.value = var / mean;
  return out;
}

FanoResult fano_factor(const SteadyState& state) {
  return fano_from_moments(state.meanfield.condensate_number, state.meanfield.alpha,
                           state.corr.photon_number().real(), state.corr.photon_anomalous());
}

RealMatrix covariance_matrix(const CorrelationTable& corr) {
  const Layout lay = corr.layout();
  const int n = lay.size();
  const int modes = 1 + lay.modes;
  // Operator index of (annihilation, creation) for mode k: cavity first.
  auto ann = [&](int k) { return k == 0 ? Layout::a() : lay.b(k - 1); };
  auto cre = [&](int k) { return k == 0 ? Layout::ad() : lay.bd(k - 1); };

  ComplexMatrix ordered = corr.moments;
  for (int k = 0; k < modes; ++k) {
    ordered(ann(k), cre(k)) = corr.moments(cre(k), ann(k)) + 1.0;
  }
  const ComplexMatrix sym = 0.5 * (ordered + ordered.transpose());

  const double s = 1.0 / std::sqrt(2.0);
  ComplexMatrix t = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < modes; ++k) {
    t(2 * k, ann(k)) = s;
    t(2 * k, cre(k)) = s;
    t(2 * k + 1, ann(k)) = Complex(0.0, -s);
    t(2 * k + 1, cre(k)) = Complex(0.0, s);
  }
  const RealMatrix c = (t * sym * t.transpose()).real();
  return 0.5 * (c + c.transpose());
}

RealMatrix covariance_matrix(const SteadyState& state) { return covariance_matrix(state.corr); }

namespace {

void check_covariance(const RealMatrix& c) {
  require(c.rows() == c.cols() && c.rows() % 2 == 0 && c.rows() > 0,
          "covariance must be square with even dimension");
  require(c.allFinite(), "covariance has non-finite entries");
  const double asym = (c - c.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-10 * std::max(1.0, c.cwiseAbs().maxCoeff()), "covariance is not symmetric");
}

}  // namespace

RealVector symplectic_eigenvalues(const RealMatrix& c) {
  check_covariance(c);
  const Eigen::Index n = c.rows();
  RealMatrix omega = RealMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; k += 2) {
    omega(k, k + 1) = 1.0;
    omega(k + 1, k) = -1.0;
  }
  // i Omega C has eigenvalues +-nu; the real matrix Omega C has +-i nu.
  Eigen::EigenSolver<RealMatrix> solver(omega * c, false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigensolverFailure, "symplectic eigenvalue solver failed");
  }
  std::vector<double> mags;
  for (Eigen::Index k = 0; k < n; ++k) mags.push_back(std::abs(solver.eigenvalues()(k)));
  std::sort(mags.begin(), mags.end());
  RealVector nu(n / 2);
  for (Eigen::Index k = 0; k < n / 2; ++k) nu(k) = 0.5 * (mags[2 * k] + mags[2 * k + 1]);
  return nu;
}

double logarithmic_negativity(const RealMatrix& c) {
  check_covariance(c);
  RealMatrix pt = c;
  pt.row(1) *= -1.0;
  pt.col(1) *= -1.0;
  double en = 0.0;
  for (double nu : symplectic_eigenvalues(pt)) {
    if (nu < 0.5) en += -std::log(2.0 * nu);
  }
  return en;
}

ObservableSet compute_observables(const SteadyState& state) {
  ObservableSet o;
  o.y = state.params.nominal_coupling();
  o.photons = photon_split(state);
  o.condensate_populations = condensate_populations(state);
  o.depletion_populations = depletion_populations(state);
  o.modes = positive_modes(state);
  o.fano = fano_factor(state);
  const RealMatrix c = covariance_matrix(state);
  o.log_negativity = logarithmic_negativity(c);
  o.min_symplectic_eigenvalue = symplectic_eigenvalues(c).minCoeff();
  o.soft_mode = o.modes.empty() ? Complex(0.0, 0.0) : o.modes.front().omega;
  return o;
}

}  // namespace dicke
