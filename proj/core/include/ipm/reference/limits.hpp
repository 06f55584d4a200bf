#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "ipm/model/builtin.hpp"
#include "ipm/reference/riccati.hpp"

namespace ipm::reference {

/// 1 - sqrt(1 + 4 alpha (1 - alpha)): the vanishing-noise limit for E1 and the
/// exact eigenvalue of LE1 at every eps. DomainError where the root is imaginary.
[[nodiscard]] double limit_eigenvalue_E1(double alpha);

/// Linearization of E2 at (+1, 0) (sign > 0) or (-1, 0).
[[nodiscard]] LinearProblemData double_well_data(double a, int sign);

/// lambda_pm = -Tr X_pm + Tr D^2 V(+-1, 0) / 2 for E2 with parameter a.
[[nodiscard]] double well_eigenvalue_E2(double alpha, double a, int sign);

/// max(lambda_+, lambda_-).
[[nodiscard]] double limit_eigenvalue_E2(double alpha, double a);

/// Exact eigenvalue of LE2 at every eps: -Tr X + 5 from the Riccati solution of
/// its own Hessian diag(8, 2) and drift Jacobian.
[[nodiscard]] double exact_eigenvalue_LE2(double alpha);

/// -Tr X + Tr M / 2 - alpha Tr B at the origin of E3.
[[nodiscard]] double limit_eigenvalue_E3(const model::CoupledProblem& problem, double alpha);

/// Reference value for a built-in problem, or nullopt when none is known (E4).
[[nodiscard]] std::optional<double> reference_eigenvalue(const model::ProblemSpec& problem,
                                                         const model::ProblemOptions& options,
                                                         double alpha);

/// CSV `alpha,lambda_limit`.
void write_reference_curve_csv(const std::filesystem::path& path, std::span<const double> alphas,
                               std::span<const double> values);

}  // namespace ipm::reference
