#include "ipm/analysis/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "ipm/error.hpp"
#include "json.hpp"

namespace ipm::analysis {
namespace {

SymmetryReport summarize(SymmetryReport r, const char* what) {
  if (r.points.size() < 3) {
    throw ConfigError(std::string("insufficient mirrored coverage for ") + what + " (" +
                      std::to_string(r.points.size()) + " pairs, need 3)");
  }
  double sum = 0.0;
  for (double a : r.asymmetry) {
    r.max_asymmetry = std::max(r.max_asymmetry, a);
    sum += a;
  }
  r.mean_asymmetry = sum / static_cast<double>(r.asymmetry.size());
  return r;
}

double interpolate_table(const RateFunctionTable& t, double s, bool& boundary) {
  const auto& xs = t.s_values;
  const auto it = std::upper_bound(xs.begin(), xs.end(), s);
  const auto i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - xs.begin(), 1,
                                                                     static_cast<std::ptrdiff_t>(xs.size()) - 1));
  boundary = t.boundary_limited[i - 1] || t.boundary_limited[i];
  const double w = (s - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return t.I_values[i - 1] + w * (t.I_values[i] - t.I_values[i - 1]);
}

// Least-squares slope of I against s over lo <= s <= hi.
struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

bool fit_line(const RateFunctionTable& t, double lo, double hi, Line& line) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.s_values.size(); ++i) {
    const double s = t.s_values[i];
    if (s < lo || s > hi) continue;
    n += 1;
    sx += s;
    sy += t.I_values[i];
    sxx += s * s;
    sxy += s * t.I_values[i];
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den <= 0.0) return false;
  line.slope = (n * sxy - sx * sy) / den;
  line.intercept = (sy - line.slope * sx) / n;
  return true;
}

}  // namespace

SymmetryReport gc_symmetry_report(const EigenvalueCurve& curve) {
  curve.validate();
  SymmetryReport r;
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    const double a = curve.alphas[i];
    const double mirror = 1.0 - a;
    if (!(a < 0.5) || mirror < curve.alphas.front() || mirror > curve.alphas.back()) continue;
    r.points.push_back(a);
    r.asymmetry.push_back(std::abs(curve.lambdas[i] - curve.interpolate(mirror)));
  }
  return summarize(std::move(r), "eigenvalue curve");
}

SymmetryReport gc_symmetry_report(const RateFunctionTable& table) {
  if (table.s_values.size() < 2) throw ConfigError("rate table needs at least 2 points");
  SymmetryReport r;
  for (std::size_t i = 0; i < table.s_values.size(); ++i) {
    const double s = table.s_values[i];
    if (!(s > 0.0) || table.boundary_limited[i]) continue;
    if (-s < table.s_values.front()) continue;
    bool boundary = false;
    const double mirrored = interpolate_table(table, -s, boundary);
    if (boundary) continue;
    r.points.push_back(s);
    r.asymmetry.push_back(std::abs(mirrored - table.I_values[i] - s));
  }
  return summarize(std::move(r), "rate table");
}

void write_symmetry_json(const std::filesystem::path& path, const SymmetryReport& curve_report,
                         const SymmetryReport* table_report) {
  auto to_json = [](const SymmetryReport& r) {
    return nlohmann::json{{"max_asymmetry", r.max_asymmetry},
                          {"mean_asymmetry", r.mean_asymmetry},
                          {"points", r.points},
                          {"asymmetry", r.asymmetry}};
  };
  nlohmann::json j;
  j["eigenvalue_curve"] = to_json(curve_report);
  if (table_report) j["rate_table"] = to_json(*table_report);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

MeanEpEstimate mean_ep_rate(const EigenvalueCurve& curve) {
  curve.validate();
  const auto& a = curve.alphas;
  const auto& l = curve.lambdas;
  const std::size_t n = a.size();
  if (0.0 < a.front() || 0.0 > a.back()) throw DomainError("alpha = 0 outside the curve grid");
  MeanEpEstimate e;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(a[i]) > 1e-12) continue;
    std::size_t lo = i, hi = i;
    if (i > 0) lo = i - 1;
    if (i + 1 < n) hi = i + 1;
    e.one_sided = (lo == i || hi == i);
    e.spacing = a[hi] - a[lo];
    e.rate = -(l[hi] - l[lo]) / e.spacing;
    return e;
  }
  const auto k = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), 0.0) - a.begin());
  e.spacing = a[k] - a[k - 1];
  e.rate = -(l[k] - l[k - 1]) / e.spacing;
  return e;
}

double rate_function_zero(const RateFunctionTable& table) {
  if (table.I_values.empty()) throw ConfigError("empty rate table");
  const double lowest = *std::min_element(table.I_values.begin(), table.I_values.end());
  const double tol = 1e-12 * std::max(1.0, std::abs(lowest));
  double first = 0.0, last = 0.0;
  bool seen = false;
  for (std::size_t i = 0; i < table.I_values.size(); ++i) {
    if (table.I_values[i] > lowest + tol) continue;
    if (!seen) first = table.s_values[i];
    last = table.s_values[i];
    seen = true;
  }
  return 0.5 * (first + last);
}

std::pair<EigenvalueCurve, RateFunctionTable> rescale_for_singular_limit(const EigenvalueCurve& curve,
                                                                         const RateFunctionTable& table) {
  curve.validate();
  const double eps = curve.epsilon;
  if (!(eps > 0.0)) throw ConfigError("curve epsilon must be positive");
  EigenvalueCurve c = curve;
  for (double& v : c.lambdas) v *= eps;
  RateFunctionTable t = table;
  for (double& s : t.s_values) s *= eps;
  for (double& v : t.I_values) v *= eps;
  return {std::move(c), std::move(t)};
}

KinkReport kink_detector(const RateFunctionTable& table, int gap_cells, int window_cells) {
  if (table.s_values.size() < 3) throw ConfigError("rate table too small for kink detection");
  if (gap_cells < 0 || window_cells <= gap_cells) throw ConfigError("need 0 <= gap < window");
  KinkReport k;
  std::vector<double> steps;
  for (std::size_t i = 1; i < table.s_values.size(); ++i) {
    steps.push_back(table.s_values[i] - table.s_values[i - 1]);
  }
  std::nth_element(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(steps.size() / 2), steps.end());
  k.cell = steps[steps.size() / 2];
  k.argmin = rate_function_zero(table);
  k.window = window_cells * k.cell;
  const double gap = gap_cells * k.cell;
  Line l, r;
  const bool left = fit_line(table, -k.window - 1e-9 * k.cell, -gap + 1e-9 * k.cell, l);
  const bool right = fit_line(table, gap - 1e-9 * k.cell, k.window + 1e-9 * k.cell, r);
  k.left_slope = l.slope;
  k.right_slope = r.slope;
  k.gc_defect = std::abs(k.left_slope + k.right_slope + 1.0);
  const double jump = r.slope - l.slope;
  k.vertex = jump > 0.0 ? (l.intercept - r.intercept) / jump : std::numeric_limits<double>::quiet_NaN();
  k.fired = left && right && std::abs(k.vertex) <= k.cell * (1.0 + 1e-9) &&
            std::abs(k.right_slope) <= 0.25 && k.gc_defect <= 0.1;
  return k;
}

}  // namespace ipm::analysis
