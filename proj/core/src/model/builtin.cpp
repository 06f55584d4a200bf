#include "ipm/model/builtin.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "ipm/engine/rng.hpp"
#include "ipm/error.hpp"
#include "ipm/reference/orthogonal.hpp"
#include "model/planar.hpp"

namespace ipm::model {
namespace {

/// Planar problems differ only in their pointwise formulas. `Formulas` supplies
/// static potential(x1, x2), local(x1, x2) and jacobian(x1, x2, J).
template <class Formulas>
class PlanarProblem final : public ProblemSpec {
 public:
  PlanarProblem(std::string name, Formulas f) : ProblemSpec(std::move(name), 2), f_(f) {}

  double potential(std::span<const double> x) const override { return f_.potential(x[0], x[1]); }
  void grad_potential(std::span<const double> x, std::span<double> out) const override {
    const planar::Planar p = f_.local(x[0], x[1]);
    out[0] = p.g1;
    out[1] = p.g2;
  }
  double laplacian_potential(std::span<const double> x) const override {
    return f_.local(x[0], x[1]).laplacian;
  }
  void drift(std::span<const double> x, std::span<double> out) const override {
    const planar::Planar p = f_.local(x[0], x[1]);
    out[0] = p.b1;
    out[1] = p.b2;
  }
  double div_drift(std::span<const double> x) const override {
    return f_.local(x[0], x[1]).divergence;
  }
  bool has_drift_jacobian() const noexcept override { return true; }
  void drift_jacobian(std::span<const double> x, std::span<double> out) const override {
    f_.jacobian(x[0], x[1], out);
  }

  void evaluate_batch(std::span<const double> points, const WeightParams& params,
                      std::span<double> drift, std::span<double> weight) const override {
    planar::evaluate_batch(f_, points.data(), weight.size(), params.epsilon, params.alpha,
                           drift.data(), weight.data());
  }

 private:
  Formulas f_;
};

using planar::CircleWell;
using planar::DoubleWell;
using planar::LinearDoubleWell;
using planar::LinearSingleWell;
using planar::SingleWell;

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("option '" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

}  // namespace

ProblemOptions ProblemOptions::from_map(const std::map<std::string, std::string>& values) {
  ProblemOptions o;
  for (const auto& [key, text] : values) {
    if (key == "a") {
      o.e2_a = parse_double(key, text);
    } else if (key == "e3.dim") {
      o.e3_dim = static_cast<int>(parse_double(key, text));
    } else if (key == "e3.seed") {
      o.e3_seed = std::stoull(text);
    } else if (key == "e3.cutoff_inner") {
      o.e3_cutoff_inner = parse_double(key, text);
    } else if (key == "e3.cutoff_outer") {
      o.e3_cutoff_outer = parse_double(key, text);
    } else {
      throw ConfigError("unknown problem option '" + key + "'");
    }
  }
  return o;
}

const std::vector<std::string>& builtin_problem_names() {
  static const std::vector<std::string> names = {"E1", "E2", "E3", "E4", "LE1", "LE2"};
  return names;
}

std::shared_ptr<const ProblemSpec> builtin_problem(const std::string& name,
                                                   const ProblemOptions& options) {
  if (name == "LE1") return std::make_shared<PlanarProblem<LinearSingleWell>>(name, LinearSingleWell{});
  if (name == "LE2") return std::make_shared<PlanarProblem<LinearDoubleWell>>(name, LinearDoubleWell{});
  if (name == "E1") return std::make_shared<PlanarProblem<SingleWell>>(name, SingleWell{});
  if (name == "E2") {
    if (!(options.e2_a > 0.0)) throw ConfigError("E2 parameter a must be positive");
    return std::make_shared<PlanarProblem<DoubleWell>>(name, DoubleWell{options.e2_a});
  }
  if (name == "E4") return std::make_shared<PlanarProblem<CircleWell>>(name, CircleWell{});
  if (name == "E3") {
    const int d = options.e3_dim;
    if (d < 2 || d % 2 != 0) throw ConfigError("E3 dimension must be even and at least 2");
    if (!(options.e3_cutoff_inner > 0.0) ||
        !(options.e3_cutoff_outer > options.e3_cutoff_inner)) {
      throw ConfigError("E3 cutoff requires 0 < inner < outer");
    }
    Eigen::MatrixXd q;
    if (options.e3_q) {
      q = *options.e3_q;
      if (q.rows() != d || q.cols() != d) {
        throw ConfigError("E3 orthogonal matrix has the wrong shape");
      }
      const double defect = (q.transpose() * q - Eigen::MatrixXd::Identity(d, d)).norm();
      if (!(defect <= 1e-10)) {
        throw ConfigError("E3 matrix Q is not orthogonal (|Q^T Q - I| = " +
                          std::to_string(defect) + ")");
      }
    } else {
      q = reference::sample_orthogonal(d, engine::StreamKey{options.e3_seed, 0});
    }
    return std::make_shared<CoupledProblem>(
        std::move(q), SmoothCutoff{options.e3_cutoff_inner, options.e3_cutoff_outer});
  }
  throw ConfigError("unknown problem '" + name + "'");
}

double SmoothCutoff::value(double r) const noexcept {
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  const double u = (r - inner) / (outer - inner);
  return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double SmoothCutoff::derivative(double r) const noexcept {
  if (r <= inner || r >= outer) return 0.0;
  const double u = (r - inner) / (outer - inner);
  const double v = 1.0 - u;
  return -30.0 * u * u * v * v / (outer - inner);
}

CoupledProblem::CoupledProblem(Eigen::MatrixXd orthogonal, SmoothCutoff cutoff)
    : ProblemSpec("E3", static_cast<int>(orthogonal.rows())),
      orthogonal_(std::move(orthogonal)),
      cutoff_(cutoff) {
  const auto d = orthogonal_.rows();
  diag_.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) diag_(i) = 5.0 + static_cast<double>(i);
  curvature_ = diag_.asDiagonal();
  Eigen::MatrixXd blocks = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 0; k + 1 < d; k += 2) {
    blocks(k, k + 1) = 1.0;
    blocks(k + 1, k) = -1.0;
  }
  const Eigen::MatrixXd b = orthogonal_.transpose() * blocks * orthogonal_;
  rotation_ = 0.5 * (b - b.transpose());
  trace_curvature_ = diag_.sum();
  trace_rotation_ = rotation_.trace();
}

double CoupledProblem::potential(std::span<const double> xs) const {
  Eigen::Map<const Eigen::VectorXd> x(xs.data(), dim());
  const double r2 = x.squaredNorm();
  return 0.5 * x.dot(diag_.cwiseProduct(x)) + 4.0 * r2 * r2;
}

void CoupledProblem::grad_potential(std::span<const double> xs, std::span<double> out) const {
  Eigen::Map<const Eigen::VectorXd> x(xs.data(), dim());
  Eigen::Map<Eigen::VectorXd> g(out.data(), dim());
  g = diag_.cwiseProduct(x) + 16.0 * x.squaredNorm() * x;
}

double CoupledProblem::laplacian_potential(std::span<const double> xs) const {
  Eigen::Map<const Eigen::VectorXd> x(xs.data(), dim());
  return trace_curvature_ + 16.0 * (dim() + 2) * x.squaredNorm();
}

void CoupledProblem::drift(std::span<const double> xs, std::span<double> out) const {
  Eigen::Map<const Eigen::VectorXd> x(xs.data(), dim());
  Eigen::Map<Eigen::VectorXd> b(out.data(), dim());
  b.noalias() = rotation_ * x;
  b *= cutoff_.value(x.norm());
}

double CoupledProblem::div_drift(std::span<const double> xs) const {
  Eigen::Map<const Eigen::VectorXd> x(xs.data(), dim());
  const double r = x.norm();
  double div = cutoff_.value(r) * trace_rotation_;
  if (r > 0.0) div += cutoff_.derivative(r) / r * x.dot(rotation_ * x);
  return div;
}

void CoupledProblem::drift_jacobian(std::span<const double> xs, std::span<double> out) const {
  const auto d = dim();
  Eigen::Map<const Eigen::VectorXd> x(xs.data(), d);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> j(out.data(), d, d);
  const double r = x.norm();
  j = cutoff_.value(r) * rotation_;
  if (r > 0.0) {
    const Eigen::VectorXd bx = rotation_ * x;
    j.noalias() += (cutoff_.derivative(r) / r) * bx * x.transpose();
  }
}

void CoupledProblem::evaluate_batch(std::span<const double> points, const WeightParams& params,
                                    std::span<double> drift_out,
                                    std::span<double> weight_potential) const {
  const auto d = dim();
  const std::size_t n = weight_potential.size();
  const double inv_eps = 1.0 / params.epsilon;
  const double tilt = params.alpha * (1.0 - params.alpha);
  const double lap_coef = 16.0 * (d + 2);
  Eigen::VectorXd bx(d), grad(d);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Map<const Eigen::VectorXd> x(points.data() + i * d, d);
    Eigen::Map<Eigen::VectorXd> b(drift_out.data() + i * d, d);
    const double r2 = x.squaredNorm();
    const double r = std::sqrt(r2);
    bx.noalias() = rotation_ * x;
    const double eta = cutoff_.value(r);
    b = eta * bx;
    grad = diag_.cwiseProduct(x) + 16.0 * r2 * x;
    double div = eta * trace_rotation_;
    if (r > cutoff_.inner) div += cutoff_.derivative(r) / r * x.dot(bx);
    weight_potential[i] = -0.25 * inv_eps * grad.squaredNorm() + 0.5 * inv_eps * b.dot(grad) -
                          tilt * inv_eps * b.squaredNorm() +
                          0.5 * (trace_curvature_ + lap_coef * r2) - params.alpha * div;
  }
}

Eigen::Matrix2d double_well_hessian(double a, int sign) {
  const double x1 = sign > 0 ? 1.0 : -1.0;
  const double s = x1 - 1.0;
  Eigen::Matrix2d h;
  h << 12.0 * x1 * x1 - 4.0, 0.0,
       0.0, 2.0 * (1.0 + a * s * s);
  return h;
}

Eigen::Matrix2d double_well_drift_jacobian() {
  Eigen::Matrix2d j;
  j << 0.0, -1.0,
       1.0, 0.0;
  return j;
}

}  // namespace ipm::model
