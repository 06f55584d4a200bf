#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ipm::model {

/// Noise level and tilting parameter of the weighted dynamics.
struct WeightParams {
  double epsilon = 1.0;
  double alpha = 0.0;

  void validate() const;
};

/// A diffusion dX = (-grad V + b) dt + sqrt(2 eps) dW on R^d.
///
/// Points are passed as contiguous spans of length dim(). Batched evaluation
/// takes row-major (n x dim) blocks. Implementations must be pure functions of
/// their inputs so that one instance can be shared by concurrent runs.
class ProblemSpec {
 public:
  ProblemSpec(std::string name, int dim);
  virtual ~ProblemSpec() = default;

  ProblemSpec(const ProblemSpec&) = delete;
  ProblemSpec& operator=(const ProblemSpec&) = delete;

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  [[nodiscard]] virtual double potential(std::span<const double> x) const = 0;
  virtual void grad_potential(std::span<const double> x, std::span<double> out) const = 0;
  [[nodiscard]] virtual double laplacian_potential(std::span<const double> x) const = 0;
  virtual void drift(std::span<const double> x, std::span<double> out) const = 0;
  [[nodiscard]] virtual double div_drift(std::span<const double> x) const = 0;

  [[nodiscard]] virtual bool has_drift_jacobian() const noexcept { return false; }
  /// Row-major d x d matrix J_ij = d b_i / d x_j. Throws when unavailable.
  virtual void drift_jacobian(std::span<const double> x, std::span<double> out) const;

  /// For each of the n rows of `points` writes b(x) into `drift` and the
  /// weight potential U^{eps,alpha}(x) into `weight_potential`.
  ///
  /// The default goes through the per-point evaluators; built-in problems
  /// override it with fused loops.
  virtual void evaluate_batch(std::span<const double> points, const WeightParams& params,
                              std::span<double> drift, std::span<double> weight_potential) const;

 private:
  std::string name_;
  int dim_;
};

/// The five terms of U^{eps,alpha}, kept separate for diagnostics.
struct WeightTerms {
  double grad_sq = 0.0;       // -|grad V|^2 / (4 eps)
  double cross = 0.0;         // <b, grad V> / (2 eps)
  double drift_sq = 0.0;      // -alpha (1 - alpha) |b|^2 / eps
  double laplacian = 0.0;     // Delta V / 2
  double divergence = 0.0;    // -alpha div b

  [[nodiscard]] double total() const noexcept {
    return grad_sq + cross + drift_sq + laplacian + divergence;
  }
};

[[nodiscard]] WeightTerms weight_terms(const ProblemSpec& problem, const WeightParams& params,
                                       std::span<const double> x);

/// U^{eps,alpha}(x). Throws NonFiniteError naming the first non-finite term.
[[nodiscard]] double evaluate_U(const ProblemSpec& problem, const WeightParams& params,
                                std::span<const double> x);

/// A problem assembled from callables, for custom models defined in code.
struct ProblemFunctions {
  std::function<double(std::span<const double>)> potential;
  std::function<void(std::span<const double>, std::span<double>)> grad_potential;
  std::function<double(std::span<const double>)> laplacian_potential;
  std::function<void(std::span<const double>, std::span<double>)> drift;
  std::function<double(std::span<const double>)> div_drift;
  std::function<void(std::span<const double>, std::span<double>)> drift_jacobian;  // optional
};

class FunctionalProblem final : public ProblemSpec {
 public:
  FunctionalProblem(std::string name, int dim, ProblemFunctions functions);

  double potential(std::span<const double> x) const override;
  void grad_potential(std::span<const double> x, std::span<double> out) const override;
  double laplacian_potential(std::span<const double> x) const override;
  void drift(std::span<const double> x, std::span<double> out) const override;
  double div_drift(std::span<const double> x) const override;
  bool has_drift_jacobian() const noexcept override;
  void drift_jacobian(std::span<const double> x, std::span<double> out) const override;

 private:
  ProblemFunctions fn_;
};

}  // namespace ipm::model
