#include "ipm/reference/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ipm/error.hpp"

namespace ipm::reference {
namespace {

double operator_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

double spectral_abscissa(const Eigen::MatrixXd& m) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().real().maxCoeff();
}

}  // namespace

void LinearProblemData::validate() const {
  const auto d = hessian.rows();
  if (d < 1 || hessian.cols() != d) throw ConfigError("hessian must be a nonempty square matrix");
  if (drift_jacobian.rows() != d || drift_jacobian.cols() != d) {
    throw ConfigError("drift Jacobian must have the shape of the hessian");
  }
  if (!hessian.allFinite() || !drift_jacobian.allFinite()) {
    throw ConfigError("linear problem data must be finite");
  }
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("hessian must be symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hessian).eigenvalues().minCoeff() <= 0.0) {
    throw ConfigError("hessian must be positive definite");
  }
}

Eigen::MatrixXd riccati_residual(const LinearProblemData& data, double alpha, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd& M = data.hessian;
  const Eigen::MatrixXd& B = data.drift_jacobian;
  return X.transpose() * X - 0.5 * (1.0 - 2.0 * alpha) * (B.transpose() * X + X.transpose() * B) -
         0.25 * M.transpose() * M + 0.25 * (B.transpose() * M + M.transpose() * B) -
         alpha * (1.0 - alpha) * B.transpose() * B;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q) {
  const auto d = F.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  // vec(F^T Y + Y F) = (I kron F^T + F^T kron I) vec(Y), column-major vec.
  Eigen::MatrixXd K(d * d, d * d);
  const Eigen::MatrixXd Ft = F.transpose();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      K.block(i * d, j * d, d, d) = I(i, j) * Ft + Ft(i, j) * I;
    }
  }
  const Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(Q.data(), d * d);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  const Eigen::VectorXd y = lu.solve(q);
  if (!y.allFinite()) throw ConvergenceError("singular Lyapunov operator");
  return Eigen::Map<const Eigen::MatrixXd>(y.data(), d, d);
}

RiccatiSolution solve_riccati(const LinearProblemData& data, double alpha) {
  data.validate();
  if (!std::isfinite(alpha)) throw ConfigError("alpha must be finite");
  const Eigen::MatrixXd& M = data.hessian;
  const Eigen::MatrixXd& B = data.drift_jacobian;
  const auto d = M.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);

  const Eigen::MatrixXd A = 0.5 * (1.0 - 2.0 * alpha) * B;
  Eigen::MatrixXd C = 0.25 * M.transpose() * M - 0.25 * (B.transpose() * M + M.transpose() * B) +
                      alpha * (1.0 - alpha) * B.transpose() * B;
  C = 0.5 * (C + C.transpose());

  // A - X0 is Hurwitz once its symmetric part is negative definite.
  const Eigen::MatrixXd sym = 0.5 * (A + A.transpose()) - 0.5 * M;
  const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().maxCoeff();
  Eigen::MatrixXd X = 0.5 * M + (std::max(0.0, top) + 1.0) * I;

  const double scale = 1.0 + std::pow(operator_norm(M), 2) + std::pow(operator_norm(B), 2);
  const double tolerance = 1e-10 * scale;
  RiccatiSolution out;
  double previous = std::numeric_limits<double>::infinity();
  constexpr int kMaxIterations = 100;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const Eigen::MatrixXd F = A - X;
    Eigen::MatrixXd next = solve_lyapunov(F, -(X * X) - C);
    next = 0.5 * (next + next.transpose());
    const double step = (next - X).cwiseAbs().maxCoeff();
    X = std::move(next);
    out.iterations = it;
    if (!X.allFinite()) throw ConvergenceError("Riccati iteration diverged");
    const double res = operator_norm(riccati_residual(data, alpha, X));
    if (res <= 1e-3 * tolerance || step <= 1e-15 * (1.0 + X.cwiseAbs().maxCoeff())) break;
    // Newton-Kleinman converges monotonically; a stall means no stabilizing solution.
    if (it > 20 && res >= previous) break;
    previous = res;
  }

  out.X = X;
  out.residual_norm = operator_norm(riccati_residual(data, alpha, X));
  out.symmetry_defect = (X - X.transpose()).cwiseAbs().maxCoeff();
  out.closed_loop_abscissa = spectral_abscissa(A - X);
  out.lambda_value = -X.trace() + 0.5 * M.trace();
  if (!(out.residual_norm <= tolerance)) {
    throw ConvergenceError("Riccati residual " + std::to_string(out.residual_norm) +
                           " above tolerance " + std::to_string(tolerance) + " at alpha " +
                           std::to_string(alpha));
  }
  if (!(out.closed_loop_abscissa < 0.0)) {
    throw ConvergenceError("Riccati solution at alpha " + std::to_string(alpha) +
                           " is not stabilizing; no maximal solution");
  }
  return out;
}

}  // namespace ipm::reference
