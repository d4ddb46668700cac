#include "dicke/meanfield.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace dicke {

RealMatrix effective_matrix(const ModelParams& params, const KernelMatrices& kernels,
                            const MeanFieldState& state, const CorrelationTable& corr) {
  require(state.condensate_number > 0.0, "effective_matrix: N_c must be > 0");
  const double y = state.coupling.y;
  const double u = state.coupling.u;
  const double photons = corr.photon_number().real();
  RealMatrix m = params.recoil_frequency * kernels.m0 + y * state.alpha.real() * kernels.m1 +
                 (u * std::norm(state.alpha) + u * photons / state.condensate_number) * kernels.m2;
  return 0.5 * (m + m.transpose());
}

Decoupling decouple_atomic_modes(const RealMatrix& m, const KernelMatrices& kernels) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::EigensolverFailure, "symmetric eigensolver did not converge");
  }
  Decoupling dec;
  dec.O = solver.eigenvectors();
  dec.lambda = solver.eigenvalues();
  const double residual =
      (dec.O.transpose() * m * dec.O - RealMatrix(dec.lambda.asDiagonal())).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!(residual < 1e-10 * scale)) {
    throw Error(ErrorKind::EigensolverFailure,
                "decoupling residual " + std::to_string(residual) + " exceeds tolerance");
  }
  dec.mt1 = dec.O.transpose() * kernels.m1 * dec.O;
  dec.mt2 = dec.O.transpose() * kernels.m2 * dec.O;
  return dec;
}

void apply_decoupling(MeanFieldState& state, const Decoupling& dec) {
  state.O = dec.O;
  state.lambda = dec.lambda;
  state.mt1 = dec.mt1;
  state.mt2 = dec.mt2;
}

ComplexVector back_action_vector(const MeanFieldState& state, const CorrelationTable& corr) {
  require(state.condensate_number > 0.0, "back_action_vector: N_c must be > 0");
  const double y = state.coupling.y;
  const double u = state.coupling.u;
  const ComplexMatrix mt1 = state.mt1.cast<Complex>();
  const ComplexMatrix mt2 = state.mt2.cast<Complex>();
  const ComplexVector adb = corr.ad_b();
  const ComplexVector ab = corr.a_b();
  ComplexVector r = 0.5 * y * (mt1 * (adb + ab));
  if (u != 0.0) r += u * (std::conj(state.alpha) * (mt2 * ab) + state.alpha * (mt2 * adb));
  return r / state.condensate_number;
}

double chemical_potential(const MeanFieldState& state, const ComplexVector& r,
                          double* imag_residue) {
  const ComplexVector lb = state.lambda.cast<Complex>().cwiseProduct(state.beta);
  const Complex mu = state.beta.dot(lb) + state.beta.dot(r);  // dot conjugates the left side
  if (imag_residue) *imag_residue = mu.imag();
  return mu.real();
}

ComplexVector update_beta(const RealVector& lambda, double mu, const ComplexVector& r,
                          double guard, double r_tol) {
  require(guard > 0.0, "update_beta: guard must be > 0");
  require(lambda.size() == r.size(), "update_beta: size mismatch");
  const Eigen::Index d = lambda.size();
  ComplexVector beta = ComplexVector::Zero(d);
  if (r.norm() < r_tol) {
    Eigen::Index j = 0;
    lambda.minCoeff(&j);
    beta(j) = 1.0;
    return beta;
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    double den = lambda(j) - mu;
    if (std::abs(den) < guard) den = (den < 0.0 ? -guard : guard);
    beta(j) = -r(j) / den;
  }
  return beta / beta.norm();
}

double cavity_frequency(const ModelParams& params, const MeanFieldState& state,
                        const CorrelationTable& corr) {
  const double u = state.coupling.u;
  double omega = -params.cavity_detuning;
  if (u == 0.0) return omega;
  const ComplexMatrix mt2 = state.mt2.cast<Complex>();
  omega += u * state.beta.dot(mt2 * state.beta).real();
  omega += u / state.condensate_number * state.mt2.cwiseProduct(corr.bd_b().real()).sum();
  return omega;
}

AlphaUpdate update_alpha(const ModelParams& params, const MeanFieldState& state,
                         const CorrelationTable& corr) {
  const double omega = cavity_frequency(params, state, corr);
  const Complex den(omega, -params.loss_half_rate);
  require(std::abs(den) > 0.0, "update_alpha: Omega - i kappa vanishes");
  const double y = state.coupling.y;
  const double u = state.coupling.u;
  const double nc = state.condensate_number;
  const ComplexMatrix mt1 = state.mt1.cast<Complex>();
  const ComplexMatrix mt2 = state.mt2.cast<Complex>();
  const ComplexMatrix bdb = corr.bd_b();

  Complex source = state.beta.dot(mt1 * state.beta) + mt1.cwiseProduct(bdb).sum() / nc;
  source *= 0.5 * y;
  if (u != 0.0) {
    source += u / nc * (corr.bd_a().cwiseProduct(mt2 * state.beta).sum() +
                        state.beta.dot(mt2 * corr.b_a()));
  }
  return {-source / den, omega};
}

double condensate_number(double atom_number, const CorrelationTable& corr, double min_fraction,
                         bool* clamped) {
  const double depletion = corr.depletion();
  if (!(depletion < atom_number)) {
    throw Error(ErrorKind::CondensateDepleted,
                "depletion " + std::to_string(depletion) + " reaches the atom number");
  }
  const double floor = min_fraction * atom_number;
  const double nc = atom_number - depletion;
  if (clamped) *clamped = nc < floor;
  return nc < floor ? floor : nc;
}

}  // namespace dicke
