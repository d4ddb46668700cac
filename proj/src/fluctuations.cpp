#include "dicke/fluctuations.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace dicke {

FluctuationSystem assemble_F(const ModelParams& params, const MeanFieldState& state,
                             const CorrelationTable& corr) {
  const int d = static_cast<int>(state.beta.size());
  const Layout lay(d);
  const int n = lay.size();
  const double y = state.coupling.y;
  const double u = state.coupling.u;
  const double g = 1.0 / state.condensate_number;
  const Complex alpha = state.alpha;
  const ComplexMatrix mt1 = state.mt1.cast<Complex>();
  const ComplexMatrix mt2 = state.mt2.cast<Complex>();
  const ComplexVector& beta = state.beta;

  const ComplexVector mt1b = mt1 * beta;
  const ComplexVector mt2b = mt2 * beta;
  // Rows are beta+ Mt; Mt is real symmetric so these are conj(Mt beta).
  const ComplexVector bmt1 = mt1b.conjugate();
  const ComplexVector bmt2 = mt2b.conjugate();

  ComplexVector to_b = 0.5 * y * bmt1;
  ComplexVector to_bd = 0.5 * y * mt1b;
  ComplexVector from_a = 0.5 * y * mt1b;
  ComplexVector from_ad = 0.5 * y * mt1b;
  if (u != 0.0) {
    to_b += u * alpha * bmt2 + u * g * (mt2 * corr.bd_a());
    to_bd += u * alpha * mt2b + u * g * (mt2 * corr.b_a());
    from_a += u * std::conj(alpha) * mt2b + u * g * (mt2 * corr.ad_b());
    from_ad += u * alpha * mt2b + u * g * (mt2 * corr.a_b());
  }

  FluctuationSystem sys;
  sys.F = ComplexMatrix::Zero(n, n);
  ComplexMatrix& F = sys.F;
  const Complex cav(state.omega, -params.loss_half_rate);
  F(lay.a(), lay.a()) = cav;
  F(lay.ad(), lay.ad()) = -std::conj(cav);
  for (int j = 0; j < d; ++j) {
    F(lay.a(), lay.b(j)) = to_b(j);
    F(lay.a(), lay.bd(j)) = to_bd(j);
    F(lay.ad(), lay.bd(j)) = -std::conj(to_b(j));
    F(lay.ad(), lay.b(j)) = -std::conj(to_bd(j));

    const double detuning = state.lambda(j) - state.mu;
    F(lay.b(j), lay.b(j)) = detuning;
    F(lay.bd(j), lay.bd(j)) = -detuning;
    F(lay.b(j), lay.a()) = from_a(j);
    F(lay.b(j), lay.ad()) = from_ad(j);
    F(lay.bd(j), lay.ad()) = -std::conj(from_a(j));
    F(lay.bd(j), lay.a()) = -std::conj(from_ad(j));
  }

  Eigen::Index z = 0;
  beta.cwiseAbs().maxCoeff(&z);
  sys.zero_mode_index = static_cast<int>(z);
  for (int idx : {lay.b(sys.zero_mode_index), lay.bd(sys.zero_mode_index)}) {
    F.row(idx).setZero();
    F.col(idx).setZero();
  }
  sys.D = assemble_D(params, n);
  return sys;
}

RealMatrix assemble_D(const ModelParams& params, int size) {
  require(size >= 2, "assemble_D: size must be >= 2");
  require(params.loss_half_rate >= 0.0, "assemble_D: kappa must be >= 0");
  RealMatrix D = RealMatrix::Zero(size, size);
  D(Layout::a(), Layout::ad()) = 2.0 * params.loss_half_rate;
  return D;
}

namespace {

// Groups eigenvalue indices whose mutual distance chains below `tol`.
std::vector<std::vector<int>> clusters(const ComplexVector& w, double tol) {
  const int n = static_cast<int>(w.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(w(i) - w(j)) < tol) parent[find(j)] = find(i);
  std::vector<std::vector<int>> out;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[slot[root]].push_back(i);
  }
  return out;
}

}  // namespace

EigenSystem bi_orthogonal_eigensystem(const ComplexMatrix& F) {
  require(F.rows() == F.cols() && F.rows() > 0, "eigensystem: F must be square");
  require(F.allFinite(), "eigensystem: F has non-finite entries");
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(F, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigensolverFailure, "complex eigensolver did not converge");
  }
  EigenSystem eig;
  eig.omegas = solver.eigenvalues();
  eig.right = solver.eigenvectors();

  for (const auto& cl : clusters(eig.omegas, kDegeneracyTolerance)) {
    if (cl.size() < 2) continue;
    ComplexMatrix block(F.rows(), static_cast<Eigen::Index>(cl.size()));
    for (std::size_t c = 0; c < cl.size(); ++c) block.col(c) = eig.right.col(cl[c]);
    Eigen::HouseholderQR<ComplexMatrix> qr(block);
    const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(block.rows(), block.cols());
    // Shared eigenvalue for the cluster keeps F r = w r consistent.
    Complex mean(0.0, 0.0);
    for (int i : cl) mean += eig.omegas(i);
    mean /= static_cast<double>(cl.size());
    for (std::size_t c = 0; c < cl.size(); ++c) {
      eig.right.col(cl[c]) = q.col(c);
      eig.omegas(cl[c]) = mean;
    }
  }
  for (Eigen::Index j = 0; j < eig.right.cols(); ++j) eig.right.col(j).normalize();

  Eigen::FullPivLU<ComplexMatrix> lu(eig.right);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::DefectiveMatrix, "eigenvector matrix is singular");
  }
  const ComplexMatrix left_adj = lu.inverse();
  eig.left = left_adj.adjoint();
  const Eigen::Index n = F.rows();
  eig.biorthogonality_residual =
      (left_adj * eig.right - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  eig.eigen_residual = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    eig.eigen_residual =
        std::max(eig.eigen_residual, (F * eig.right.col(j) - eig.omegas(j) * eig.right.col(j)).norm());
  }
  const double scale = std::max(1.0, F.cwiseAbs().maxCoeff());
  if (!(eig.biorthogonality_residual < kDefectiveThreshold) ||
      !(eig.eigen_residual < kDefectiveThreshold * scale)) {
    throw Error(ErrorKind::DefectiveMatrix,
                "bi-orthonormalisation residual " + std::to_string(eig.biorthogonality_residual) +
                    ", eigen residual " + std::to_string(eig.eigen_residual));
  }
  return eig;
}

CorrelationTable steady_state_correlations(const EigenSystem& eig, const RealMatrix& D) {
  const Eigen::Index n = eig.omegas.size();
  require(D.rows() == n && D.cols() == n, "steady_state_correlations: size mismatch");
  const ComplexMatrix la = eig.left.adjoint();  // rows l_k+
  const ComplexMatrix w = la * D.cast<Complex>() * la.transpose();
  const double cutoff = kNoiseWeightCutoff * std::max(1.0, D.cwiseAbs().maxCoeff());

  ComplexMatrix x = ComplexMatrix::Zero(n, n);
  const Complex i_unit(0.0, 1.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      if (std::abs(w(k, l)) < cutoff) continue;
      const Complex s = eig.omegas(k) + eig.omegas(l);
      if (std::abs(s) < kMarginalThreshold &&
          !(std::abs(w(k, l)) < kMarginalContribution * std::abs(s))) {
        throw Error(ErrorKind::MarginalMode, "noisy mode pair with vanishing damping (" +
                                                 std::to_string(k) + ", " + std::to_string(l) + ")");
      }
      x(k, l) = w(k, l) / (i_unit * s);
    }
  }
  return CorrelationTable(ComplexMatrix(eig.right * x * eig.right.transpose()));
}

double max_growth_rate(const EigenSystem& eig) { return eig.omegas.imag().maxCoeff(); }

}  // namespace dicke
