#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ipm::analysis {

enum class Provenance { ipm, limit_formula, riccati };

[[nodiscard]] const char* to_string(Provenance p) noexcept;

/// lambda(alpha) sampled on a strictly increasing alpha grid.
struct EigenvalueCurve {
  std::vector<double> alphas;
  std::vector<double> lambdas;
  double epsilon = 1.0;
  Provenance provenance = Provenance::ipm;

  /// Throws ConfigError unless the arrays match, hold at least two finite
  /// points and alphas increase strictly.
  void validate() const;

  /// Linear interpolation; DomainError outside [alphas.front(), alphas.back()].
  [[nodiscard]] double interpolate(double alpha) const;
};

/// I(s) = max over the alpha grid of (-alpha s - lambda(alpha)).
struct RateFunctionTable {
  std::vector<double> s_values;
  std::vector<double> I_values;
  std::vector<double> argmax_alphas;
  /// The maximizer sits on the first or last grid point, so I(s) is only a
  /// lower bound for the transform of the untruncated curve.
  std::vector<bool> boundary_limited;
};

/// 201 uniform points on [-s_max, s_max], s_max = 1.1 max |discrete slope|.
[[nodiscard]] std::vector<double> default_s_grid(const EigenvalueCurve& curve, int points = 201);

/// Discrete Legendre transform. Ties go to the smallest alpha.
[[nodiscard]] RateFunctionTable legendre_transform(const EigenvalueCurve& curve,
                                                   std::span<const double> s_grid);

/// Convenience overload on default_s_grid(curve).
[[nodiscard]] RateFunctionTable legendre_transform(const EigenvalueCurve& curve);

/// CSV `s,I,argmax_alpha,boundary_flag`.
void write_rate_table_csv(const std::filesystem::path& path, const RateFunctionTable& table);

/// CSV `alpha,lambda`.
void write_curve_csv(const std::filesystem::path& path, const EigenvalueCurve& curve);

}  // namespace ipm::analysis
