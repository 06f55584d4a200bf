#include "ipm/reference/limits.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "ipm/error.hpp"

namespace ipm::reference {

double limit_eigenvalue_E1(double alpha) {
  const double radicand = 1.0 + 4.0 * alpha * (1.0 - alpha);
  if (!(radicand >= 0.0)) {
    throw DomainError("1 + 4 alpha (1 - alpha) < 0 at alpha = " + std::to_string(alpha));
  }
  return 1.0 - std::sqrt(radicand);
}

LinearProblemData double_well_data(double a, int sign) {
  if (!(a > 0.0)) throw ConfigError("E2 parameter a must be positive");
  return {model::double_well_hessian(a, sign), model::double_well_drift_jacobian()};
}

double well_eigenvalue_E2(double alpha, double a, int sign) {
  return solve_riccati(double_well_data(a, sign), alpha).lambda_value;
}

double limit_eigenvalue_E2(double alpha, double a) {
  return std::max(well_eigenvalue_E2(alpha, a, +1), well_eigenvalue_E2(alpha, a, -1));
}

double exact_eigenvalue_LE2(double alpha) {
  Eigen::Matrix2d m, b;
  m << 8.0, 0.0,
       0.0, 2.0;
  b << 0.0, -1.0,
       1.0, 0.0;
  return solve_riccati({m, b}, alpha).lambda_value;
}

double limit_eigenvalue_E3(const model::CoupledProblem& problem, double alpha) {
  const RiccatiSolution s = solve_riccati({problem.curvature(), problem.rotation()}, alpha);
  return s.lambda_value - alpha * problem.rotation().trace();
}

std::optional<double> reference_eigenvalue(const model::ProblemSpec& problem,
                                           const model::ProblemOptions& options, double alpha) {
  const std::string& name = problem.name();
  if (name == "E1" || name == "LE1") return limit_eigenvalue_E1(alpha);
  if (name == "E2") return limit_eigenvalue_E2(alpha, options.e2_a);
  if (name == "LE2") return exact_eigenvalue_LE2(alpha);
  if (name == "E3") {
    if (const auto* e3 = dynamic_cast<const model::CoupledProblem*>(&problem)) {
      return limit_eigenvalue_E3(*e3, alpha);
    }
  }
  return std::nullopt;
}

void write_reference_curve_csv(const std::filesystem::path& path, std::span<const double> alphas,
                               std::span<const double> values) {
  if (alphas.size() != values.size()) throw ConfigError("reference curve arrays differ in length");
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "alpha,lambda_limit\n");
  for (std::size_t i = 0; i < alphas.size(); ++i) std::fprintf(f, "%.17g,%.17g\n", alphas[i], values[i]);
  const bool failed = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || failed) throw IoError("failed writing " + path.string());
}

}  // namespace ipm::reference
