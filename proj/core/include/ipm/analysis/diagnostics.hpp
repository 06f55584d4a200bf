#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "ipm/analysis/legendre.hpp"

namespace ipm::analysis {

struct SymmetryReport {
  double max_asymmetry = 0.0;
  double mean_asymmetry = 0.0;
  std::vector<double> points;      // alpha (curves) or s (rate tables)
  std::vector<double> asymmetry;   // |lambda(a) - lambda(1 - a)| or |I(-s) - I(s) - s|
};

/// |lambda(a) - lambda(1 - a)| over grid points a <= 1/2 whose mirror lies in
/// the grid hull, interpolating linearly off-grid. Needs at least 3 pairs.
[[nodiscard]] SymmetryReport gc_symmetry_report(const EigenvalueCurve& curve);

/// |I(-s) - I(s) - s| over s > 0 where s and -s are inside the grid and
/// neither is boundary-limited; I(-s) is interpolated. Needs at least 3 points.
[[nodiscard]] SymmetryReport gc_symmetry_report(const RateFunctionTable& table);

void write_symmetry_json(const std::filesystem::path& path, const SymmetryReport& curve_report,
                         const SymmetryReport* table_report = nullptr);

struct MeanEpEstimate {
  double rate = 0.0;     // -d lambda / d alpha at 0
  double spacing = 0.0;  // alpha distance spanned by the difference
  bool one_sided = false;
};

/// Central difference of -lambda at alpha = 0 over the neighbouring grid
/// points (the bracketing pair when 0 is not a grid point), one-sided at an
/// end of the grid. DomainError when 0 is outside the grid hull.
[[nodiscard]] MeanEpEstimate mean_ep_rate(const EigenvalueCurve& curve);

/// Midpoint of the set of s-grid points where I is within 1e-12 (relative) of
/// its minimum.
[[nodiscard]] double rate_function_zero(const RateFunctionTable& table);

/// (alpha, eps lambda(alpha)) and (s', eps I(s' / eps)). The table is mapped
/// pointwise, so s' = eps s.
[[nodiscard]] std::pair<EigenvalueCurve, RateFunctionTable> rescale_for_singular_limit(
    const EigenvalueCurve& curve, const RateFunctionTable& table);

struct KinkReport {
  bool fired = false;
  double argmin = 0.0;       // rate_function_zero of the table
  double vertex = 0.0;       // where the two one-sided lines meet
  double cell = 0.0;         // s-grid spacing
  double left_slope = 0.0;   // least squares on [-window, -gap]
  double right_slope = 0.0;  // least squares on [gap, window]
  double window = 0.0;
  double gc_defect = 0.0;    // |left + right + 1|: a Gallavotti-Cohen kink has left = -right - 1
};

/// Looks for the kink of a rescaled rate function at s = 0: one-sided lines
/// meeting within one grid cell of 0, a nearly flat right branch (|right| <= 0.25)
/// and slopes related by the Gallavotti-Cohen identity (gc_defect <= 0.1,
/// which also forces a slope jump of about 1).
[[nodiscard]] KinkReport kink_detector(const RateFunctionTable& table, int gap_cells = 2,
                                       int window_cells = 12);

}  // namespace ipm::analysis
