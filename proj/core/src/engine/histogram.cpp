#include "ipm/engine/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "ipm/error.hpp"

namespace ipm::engine {
namespace {

std::vector<double> edges(double lo, double hi, int bins) {
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) e[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
  e.back() = hi;
  return e;
}

std::size_t bin_of(double v, double lo, double hi, int bins) {
  auto k = static_cast<long long>(std::floor((v - lo) / (hi - lo) * bins));
  return static_cast<std::size_t>(std::clamp<long long>(k, 0, bins - 1));
}

}  // namespace

DensityHistogram final_density(const Ensemble& ensemble, std::array<int, 2> axes,
                               std::array<int, 2> bins, std::optional<Box> range) {
  const std::size_t m = ensemble.size();
  if (m == 0) throw ConfigError("cannot histogram an empty ensemble");
  for (int a : axes) {
    if (a < 0 || a >= ensemble.dim) {
      throw ConfigError("histogram axis " + std::to_string(a) + " outside dimension " +
                        std::to_string(ensemble.dim));
    }
  }
  if (bins[0] < 1 || bins[1] < 1) throw ConfigError("histogram needs at least one bin per axis");

  Box box;
  if (range) {
    box = *range;
    for (int k = 0; k < 2; ++k) {
      if (!(box.hi[k] > box.lo[k])) throw ConfigError("histogram range must have hi > lo");
    }
  } else {
    for (int k = 0; k < 2; ++k) {
      double lo = ensemble.row(0)[axes[k]], hi = lo;
      for (std::size_t i = 1; i < m; ++i) {
        lo = std::min(lo, ensemble.row(i)[axes[k]]);
        hi = std::max(hi, ensemble.row(i)[axes[k]]);
      }
      if (hi - lo <= 0.0) {
        lo -= 0.5;
        hi += 0.5;
      }
      box.lo[k] = lo;
      box.hi[k] = hi;
    }
  }

  DensityHistogram h;
  h.axes = axes;
  h.edges_x = edges(box.lo[0], box.hi[0], bins[0]);
  h.edges_y = edges(box.lo[1], box.hi[1], bins[1]);
  h.mass.assign(static_cast<std::size_t>(bins[0]) * static_cast<std::size_t>(bins[1]), 0.0);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = ensemble.row(i)[axes[0]];
    const double y = ensemble.row(i)[axes[1]];
    if (x < box.lo[0] || x > box.hi[0] || y < box.lo[1] || y > box.hi[1]) continue;
    h.mass[bin_of(x, box.lo[0], box.hi[0], bins[0]) * static_cast<std::size_t>(bins[1]) +
           bin_of(y, box.lo[1], box.hi[1], bins[1])] += 1.0;
    ++inside;
  }
  if (inside == 0) throw ConfigError("no particle inside the histogram range");
  for (double& v : h.mass) v /= static_cast<double>(inside);
  return h;
}

void write_histogram_csv(const std::filesystem::path& path, const DensityHistogram& h) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "# axes,%d,%d\n# x_edges", h.axes[0], h.axes[1]);
  for (double e : h.edges_x) std::fprintf(f, ",%.17g", e);
  std::fprintf(f, "\n# y_edges");
  for (double e : h.edges_y) std::fprintf(f, ",%.17g", e);
  std::fprintf(f, "\nx_bin,y_bin,mass\n");
  for (std::size_t i = 0; i < h.nx(); ++i)
    for (std::size_t j = 0; j < h.ny(); ++j) std::fprintf(f, "%zu,%zu,%.17g\n", i, j, h.at(i, j));
  const bool failed = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || failed) throw IoError("failed writing " + path.string());
}

void write_per_step_csv(const std::filesystem::path& path, std::span<const double> per_step, double dt) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "t,lambda_n\n");
  for (std::size_t n = 0; n < per_step.size(); ++n) {
    std::fprintf(f, "%.17g,%.17g\n", static_cast<double>(n + 1) * dt, per_step[n]);
  }
  const bool failed = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || failed) throw IoError("failed writing " + path.string());
}

}  // namespace ipm::engine
