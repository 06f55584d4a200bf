#include "ipm/analysis/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "ipm/error.hpp"

namespace ipm::analysis {

const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::ipm: return "ipm";
    case Provenance::limit_formula: return "limit_formula";
    case Provenance::riccati: return "riccati";
  }
  return "unknown";
}

void EigenvalueCurve::validate() const {
  if (alphas.size() != lambdas.size()) throw ConfigError("curve arrays differ in length");
  if (alphas.size() < 2) throw ConfigError("curve needs at least 2 grid points");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!std::isfinite(alphas[i]) || !std::isfinite(lambdas[i])) {
      throw ConfigError("curve values must be finite");
    }
    if (i > 0 && !(alphas[i] > alphas[i - 1])) throw ConfigError("alphas must increase strictly");
  }
}

double EigenvalueCurve::interpolate(double alpha) const {
  if (alpha < alphas.front() || alpha > alphas.back()) {
    throw DomainError("alpha " + std::to_string(alpha) + " outside the curve grid");
  }
  const auto it = std::upper_bound(alphas.begin(), alphas.end(), alpha);
  if (it == alphas.end()) return lambdas.back();
  const auto i = static_cast<std::size_t>(it - alphas.begin());
  if (i == 0) return lambdas.front();
  const double t = (alpha - alphas[i - 1]) / (alphas[i] - alphas[i - 1]);
  return lambdas[i - 1] + t * (lambdas[i] - lambdas[i - 1]);
}

std::vector<double> default_s_grid(const EigenvalueCurve& curve, int points) {
  curve.validate();
  if (points < 2) throw ConfigError("s grid needs at least 2 points");
  double slope = 0.0;
  for (std::size_t i = 1; i < curve.alphas.size(); ++i) {
    slope = std::max(slope, std::abs((curve.lambdas[i] - curve.lambdas[i - 1]) /
                                     (curve.alphas[i] - curve.alphas[i - 1])));
  }
  const double s_max = slope > 0.0 ? 1.1 * slope : 1.0;
  std::vector<double> s(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    s[static_cast<std::size_t>(k)] = -s_max + 2.0 * s_max * k / (points - 1);
  }
  return s;
}

RateFunctionTable legendre_transform(const EigenvalueCurve& curve, std::span<const double> s_grid) {
  curve.validate();
  if (s_grid.empty()) throw ConfigError("s grid must be nonempty");
  RateFunctionTable t;
  const std::size_t n = curve.alphas.size();
  for (double s : s_grid) {
    std::size_t best = 0;
    double value = -curve.alphas[0] * s - curve.lambdas[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double v = -curve.alphas[i] * s - curve.lambdas[i];
      if (v > value) {
        value = v;
        best = i;
      }
    }
    t.s_values.push_back(s);
    t.I_values.push_back(value);
    t.argmax_alphas.push_back(curve.alphas[best]);
    t.boundary_limited.push_back(best == 0 || best == n - 1);
  }
  return t;
}

RateFunctionTable legendre_transform(const EigenvalueCurve& curve) {
  const auto grid = default_s_grid(curve);
  return legendre_transform(curve, grid);
}

void write_rate_table_csv(const std::filesystem::path& path, const RateFunctionTable& table) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "s,I,argmax_alpha,boundary_flag\n");
  for (std::size_t i = 0; i < table.s_values.size(); ++i) {
    std::fprintf(f, "%.17g,%.17g,%.17g,%d\n", table.s_values[i], table.I_values[i],
                 table.argmax_alphas[i], table.boundary_limited[i] ? 1 : 0);
  }
  const bool failed = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || failed) throw IoError("failed writing " + path.string());
}

void write_curve_csv(const std::filesystem::path& path, const EigenvalueCurve& curve) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "alpha,lambda\n");
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    std::fprintf(f, "%.17g,%.17g\n", curve.alphas[i], curve.lambdas[i]);
  }
  const bool failed = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || failed) throw IoError("failed writing " + path.string());
}

}  // namespace ipm::analysis
