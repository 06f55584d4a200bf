#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "ipm/engine/ensemble.hpp"

namespace ipm::engine {

/// Axis-aligned box [lo[0], hi[0]] x [lo[1], hi[1]].
struct Box {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
};

/// 2-D marginal histogram of an ensemble, normalized to total mass 1.
struct DensityHistogram {
  std::array<int, 2> axes{0, 1};
  std::vector<double> edges_x;
  std::vector<double> edges_y;
  std::vector<double> mass;  // row-major, mass[i * ny + j] for x-bin i, y-bin j

  [[nodiscard]] std::size_t nx() const noexcept { return edges_x.size() - 1; }
  [[nodiscard]] std::size_t ny() const noexcept { return edges_y.size() - 1; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return mass[i * ny() + j]; }
};

/// Histogram over coordinates `axes`. Without a range the box is the particle
/// extent, widened by 0.5 on each side along degenerate axes. Particles on the
/// upper edge fall in the last bin; particles outside an explicit range are
/// dropped before normalization.
[[nodiscard]] DensityHistogram final_density(const Ensemble& ensemble, std::array<int, 2> axes = {0, 1},
                                             std::array<int, 2> bins = {100, 100},
                                             std::optional<Box> range = std::nullopt);

/// `# x_edges,...` and `# y_edges,...` lines, then `x_bin,y_bin,mass` rows.
void write_histogram_csv(const std::filesystem::path& path, const DensityHistogram& h);

/// Two-column CSV `t,lambda_n` with t = n dt, n = 1..N.
void write_per_step_csv(const std::filesystem::path& path, std::span<const double> per_step, double dt);

}  // namespace ipm::engine
