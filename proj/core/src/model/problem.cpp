#include "ipm/model/problem.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "ipm/error.hpp"

namespace ipm::model {

void WeightParams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("epsilon must be positive and finite");
  }
  if (!std::isfinite(alpha)) throw ConfigError("alpha must be finite");
}

ProblemSpec::ProblemSpec(std::string name, int dim) : name_(std::move(name)), dim_(dim) {
  if (dim_ < 1) throw ConfigError("problem dimension must be positive");
}

void ProblemSpec::drift_jacobian(std::span<const double>, std::span<double>) const {
  throw Error("problem '" + name_ + "' provides no drift Jacobian");
}

void ProblemSpec::evaluate_batch(std::span<const double> points, const WeightParams& params,
                                 std::span<double> drift_out,
                                 std::span<double> weight_potential) const {
  const auto d = static_cast<std::size_t>(dim_);
  const std::size_t n = weight_potential.size();
  std::vector<double> grad(d);
  const double inv_eps = 1.0 / params.epsilon;
  const double tilt = params.alpha * (1.0 - params.alpha);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = points.subspan(i * d, d);
    auto b = drift_out.subspan(i * d, d);
    drift(x, b);
    grad_potential(x, grad);
    double g2 = 0.0, bg = 0.0, b2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      g2 += grad[k] * grad[k];
      bg += b[k] * grad[k];
      b2 += b[k] * b[k];
    }
    weight_potential[i] = -0.25 * inv_eps * g2 + 0.5 * inv_eps * bg - tilt * inv_eps * b2 +
                          0.5 * laplacian_potential(x) - params.alpha * div_drift(x);
  }
}

WeightTerms weight_terms(const ProblemSpec& problem, const WeightParams& params,
                         std::span<const double> x) {
  const auto d = static_cast<std::size_t>(problem.dim());
  std::vector<double> grad(d), b(d);
  problem.grad_potential(x, grad);
  problem.drift(x, b);
  double g2 = 0.0, bg = 0.0, b2 = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    g2 += grad[k] * grad[k];
    bg += b[k] * grad[k];
    b2 += b[k] * b[k];
  }
  const double eps = params.epsilon;
  WeightTerms t;
  t.grad_sq = -g2 / (4.0 * eps);
  t.cross = bg / (2.0 * eps);
  t.drift_sq = -params.alpha * (1.0 - params.alpha) * b2 / eps;
  t.laplacian = 0.5 * problem.laplacian_potential(x);
  t.divergence = -params.alpha * problem.div_drift(x);
  return t;
}

namespace {

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

}  // namespace

double evaluate_U(const ProblemSpec& problem, const WeightParams& params,
                  std::span<const double> x) {
  if (!(params.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (x.size() != static_cast<std::size_t>(problem.dim())) {
    throw ConfigError("point dimension does not match problem dimension");
  }
  const WeightTerms t = weight_terms(problem, params, x);
  const std::pair<const char*, double> terms[] = {
      {"-|grad V|^2/(4 eps)", t.grad_sq},
      {"<b, grad V>/(2 eps)", t.cross},
      {"-alpha(1-alpha)|b|^2/eps", t.drift_sq},
      {"Delta V/2", t.laplacian},
      {"-alpha div b", t.divergence},
  };
  for (const auto& [label, value] : terms) {
    if (!std::isfinite(value)) {
      throw NonFiniteError("non-finite weight term " + std::string(label) + " of problem '" +
                           problem.name() + "' at x = " + format_point(x));
    }
  }
  const double u = t.total();
  if (!std::isfinite(u)) {
    throw NonFiniteError("weight potential overflows at x = " + format_point(x));
  }
  return u;
}

FunctionalProblem::FunctionalProblem(std::string name, int dim, ProblemFunctions functions)
    : ProblemSpec(std::move(name), dim), fn_(std::move(functions)) {
  if (!fn_.potential || !fn_.grad_potential || !fn_.laplacian_potential || !fn_.drift ||
      !fn_.div_drift) {
    throw ConfigError("custom problem '" + this->name() + "' is missing an evaluator");
  }
}

double FunctionalProblem::potential(std::span<const double> x) const { return fn_.potential(x); }
void FunctionalProblem::grad_potential(std::span<const double> x, std::span<double> out) const {
  fn_.grad_potential(x, out);
}
double FunctionalProblem::laplacian_potential(std::span<const double> x) const {
  return fn_.laplacian_potential(x);
}
void FunctionalProblem::drift(std::span<const double> x, std::span<double> out) const {
  fn_.drift(x, out);
}
double FunctionalProblem::div_drift(std::span<const double> x) const { return fn_.div_drift(x); }
bool FunctionalProblem::has_drift_jacobian() const noexcept {
  return static_cast<bool>(fn_.drift_jacobian);
}
void FunctionalProblem::drift_jacobian(std::span<const double> x, std::span<double> out) const {
  if (!fn_.drift_jacobian) ProblemSpec::drift_jacobian(x, out);
  fn_.drift_jacobian(x, out);
}

}  // namespace ipm::model
