#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ipm::engine {

/// M particles in R^d stored row-major, plus the number of completed steps.
struct Ensemble {
  int dim = 1;
  std::vector<double> positions;
  std::uint64_t step = 0;

  Ensemble() = default;
  Ensemble(int d, std::size_t m) : dim(d), positions(static_cast<std::size_t>(d) * m, 0.0) {}

  [[nodiscard]] std::size_t size() const noexcept {
    return positions.size() / static_cast<std::size_t>(dim);
  }
  [[nodiscard]] std::span<double> row(std::size_t i) noexcept {
    return {positions.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {positions.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// Header of a saved ensemble.
struct EnsembleHeader {
  std::string problem;
  double epsilon = 0.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

/// CSV: a `d,M,problem,epsilon,alpha,seed,step` header, one value row, then
/// M rows of coordinates printed with 17 significant digits (round-trip exact).
void save_ensemble(const std::filesystem::path& path, const Ensemble& ensemble,
                   const EnsembleHeader& header);

struct LoadedEnsemble {
  Ensemble ensemble;
  EnsembleHeader header;
};

/// Throws IoError on malformed files and NonFiniteError on non-finite coordinates.
[[nodiscard]] LoadedEnsemble load_ensemble(const std::filesystem::path& path);

/// 64-bit FNV-1a of the file contents as 16 lowercase hex digits.
[[nodiscard]] std::string file_hash(const std::filesystem::path& path);

}  // namespace ipm::engine
