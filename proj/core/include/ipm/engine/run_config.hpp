#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "ipm/model/problem.hpp"

namespace ipm::engine {

struct StandardGaussian {};

struct PointMass {
  std::vector<double> x0;
};

/// Ensemble previously written by save_ensemble().
struct FromFile {
  std::filesystem::path path;
};

using InitialMeasure = std::variant<StandardGaussian, PointMass, FromFile>;

/// Parameters of one interacting-particle run.
struct RunConfig {
  double epsilon = 0.1;
  double alpha = 0.0;
  std::size_t num_particles = 1000;
  double dt = 0.0078125;
  double horizon = 512.0;
  double burn_in = 0.0;
  std::uint64_t seed = 0;
  InitialMeasure initial_measure = StandardGaussian{};

  /// Throws ConfigError unless T / dt and burn_in / dt are integers and
  /// 0 <= burn_in < T.
  void validate() const;

  [[nodiscard]] std::uint64_t num_steps() const;
  [[nodiscard]] std::uint64_t burn_in_steps() const;
  [[nodiscard]] model::WeightParams weight_params() const { return {epsilon, alpha}; }
};

/// Rounds t / dt to the nearest integer, failing when it is not one to within
/// a relative 1e-9.
[[nodiscard]] std::uint64_t step_count(double t, double dt, const char* what);

}  // namespace ipm::engine
