#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipm/model/problem.hpp"

namespace ipm::model {

/// Options of the built-in problems. Unused fields are ignored.
struct ProblemOptions {
  double e2_a = 0.4;                    // double-well asymmetry parameter a
  int e3_dim = 16;                      // even dimension of the coupled problem
  std::optional<Eigen::MatrixXd> e3_q;  // explicit orthogonal matrix
  std::uint64_t e3_seed = 0;            // Haar sampling seed when e3_q is unset
  double e3_cutoff_inner = 1.0;         // eta(r) = 1 for r <= inner
  double e3_cutoff_outer = 2.0;         // eta(r) = 0 for r >= outer

  /// Keys: a, e3.dim, e3.seed, e3.cutoff_inner, e3.cutoff_outer.
  static ProblemOptions from_map(const std::map<std::string, std::string>& values);
};

/// Names accepted by builtin_problem().
[[nodiscard]] const std::vector<std::string>& builtin_problem_names();

/// E1, E2, E3, E4, LE1 or LE2, with closed-form derivatives.
[[nodiscard]] std::shared_ptr<const ProblemSpec> builtin_problem(const std::string& name,
                                                                 const ProblemOptions& options = {});

/// C^2 smoothstep cutoff: 1 on [0, inner], 0 on [outer, inf).
struct SmoothCutoff {
  double inner = 1.0;
  double outer = 2.0;

  [[nodiscard]] double value(double r) const noexcept;
  [[nodiscard]] double derivative(double r) const noexcept;
};

/// V = x^T M x / 2 + 4 |x|^4, b = eta(|x|) B x with B = Q^T blockdiag(J) Q.
class CoupledProblem final : public ProblemSpec {
 public:
  CoupledProblem(Eigen::MatrixXd orthogonal, SmoothCutoff cutoff);

  double potential(std::span<const double> x) const override;
  void grad_potential(std::span<const double> x, std::span<double> out) const override;
  double laplacian_potential(std::span<const double> x) const override;
  void drift(std::span<const double> x, std::span<double> out) const override;
  double div_drift(std::span<const double> x) const override;
  bool has_drift_jacobian() const noexcept override { return true; }
  void drift_jacobian(std::span<const double> x, std::span<double> out) const override;
  void evaluate_batch(std::span<const double> points, const WeightParams& params,
                      std::span<double> drift, std::span<double> weight_potential) const override;

  /// Hessian of V at the origin, diag(5, 6, ..., 4 + d).
  [[nodiscard]] const Eigen::MatrixXd& curvature() const noexcept { return curvature_; }
  /// Drift Jacobian at the origin.
  [[nodiscard]] const Eigen::MatrixXd& rotation() const noexcept { return rotation_; }
  [[nodiscard]] const Eigen::MatrixXd& orthogonal() const noexcept { return orthogonal_; }
  [[nodiscard]] const SmoothCutoff& cutoff() const noexcept { return cutoff_; }

 private:
  Eigen::MatrixXd orthogonal_;
  Eigen::MatrixXd curvature_;
  Eigen::MatrixXd rotation_;
  Eigen::VectorXd diag_;
  double trace_curvature_ = 0.0;
  double trace_rotation_ = 0.0;
  SmoothCutoff cutoff_;
};

/// Hessian of V^{E2}(.; a) at (+1, 0) (sign > 0) or (-1, 0) (sign < 0).
[[nodiscard]] Eigen::Matrix2d double_well_hessian(double a, int sign);
/// Jacobian of b^{E1} at (+-1, 0); the same matrix for both wells.
[[nodiscard]] Eigen::Matrix2d double_well_drift_jacobian();

}  // namespace ipm::model
