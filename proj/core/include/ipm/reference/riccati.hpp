#pragma once

#include <Eigen/Dense>

namespace ipm::reference {

/// Hessian M of V and drift Jacobian B at a non-degenerate critical point.
struct LinearProblemData {
  Eigen::MatrixXd hessian;
  Eigen::MatrixXd drift_jacobian;

  /// Throws ConfigError unless M is square, symmetric to 1e-12 and positive
  /// definite, and B has the same shape.
  void validate() const;
};

struct RiccatiSolution {
  Eigen::MatrixXd X;
  double residual_norm = 0.0;     // operator norm of riccati_residual(X)
  double lambda_value = 0.0;      // -Tr X + Tr M / 2
  double symmetry_defect = 0.0;   // max |X - X^T|
  double closed_loop_abscissa = 0.0;  // max Re eig((1 - 2 alpha) B / 2 - X); < 0 certifies maximality
  int iterations = 0;
};

/// X^T X - (1 - 2a)/2 (B^T X + X^T B) - M^T M / 4 + (B^T M + M^T B) / 4 - a(1 - a) B^T B.
[[nodiscard]] Eigen::MatrixXd riccati_residual(const LinearProblemData& data, double alpha,
                                               const Eigen::MatrixXd& X);

/// Maximal symmetric solution of riccati_residual(X) = 0.
///
/// For symmetric X the equation is the continuous algebraic Riccati equation
///   A^T X + X A - X^2 + C = 0,  A = (1 - 2a) B / 2,
///   C = M^T M / 4 - (B^T M + M^T B) / 4 + a(1 - a) B^T B,
/// whose maximal solution is the stabilizing one (A - X Hurwitz). It is found
/// by Newton-Kleinman iteration from a stabilizing start. Throws
/// ConvergenceError when the iteration stalls or the residual exceeds
/// 1e-10 (1 + |M|^2 + |B|^2).
[[nodiscard]] RiccatiSolution solve_riccati(const LinearProblemData& data, double alpha);

/// Solves F^T Y + Y F = Q for Y through the Kronecker form (small d only).
[[nodiscard]] Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Q);

}  // namespace ipm::reference
