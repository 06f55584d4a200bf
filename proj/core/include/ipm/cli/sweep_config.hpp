#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <set>
#include <memory>
#include <string>
#include <vector>

#include "ipm/cli/key_value.hpp"
#include "ipm/engine/run_config.hpp"
#include "ipm/model/builtin.hpp"

namespace ipm::cli {

/// A built-in problem plus its options as written in the configuration
/// (`problem = E2`, `problem.a = 0.4`, `problem.e3.q_file = Q.csv`, ...).
struct ProblemSelection {
  std::string name = "LE1";
  std::map<std::string, std::string> options;

  /// Resolved options; reads the E3 matrix when `e3.q_file` is given.
  [[nodiscard]] model::ProblemOptions resolve() const;
  [[nodiscard]] std::shared_ptr<const model::ProblemSpec> make() const;
};

/// The sweep alpha grid: count points on [min, max] inclusive.
[[nodiscard]] std::vector<double> uniform_alpha_grid(int count, double lo, double hi);

/// Burn-in as a time `t`, or as `T/k` relative to the horizon.
[[nodiscard]] double parse_burn_in(const std::string& text, double horizon);

struct SweepConfig {
  ProblemSelection problem;
  std::vector<double> alphas = uniform_alpha_grid(32, -0.1, 1.1);
  std::vector<double> epsilons = {0.1, 0.01, 0.001};
  engine::RunConfig run;  // template: epsilon, alpha and seed are set per run
  bool warm_start = false;
  std::string burn_in = "0";         // cold runs
  std::string warm_burn_in = "T/8";  // runs started from the previous epsilon
  int replicates = 1;
  int workers = 1;
  std::filesystem::path output_dir = "ipm_out";
  std::vector<double> histogram_alphas;
  std::array<int, 2> histogram_bins{100, 100};
  std::array<int, 2> histogram_axes{0, 1};

  /// Throws ConfigError on an empty alpha grid, non-positive epsilons, an
  /// epsilon list that is not strictly descending under warm start, bad
  /// replicate or worker counts, or an invalid run template.
  void validate() const;

  /// Burn-in time applied at stage k of the epsilon list.
  [[nodiscard]] double burn_in_for_stage(std::size_t stage) const;
};

/// Keys shared by `run` and `sweep`:
///   problem, problem.<option>, epsilon, alpha, particles, dt, horizon,
///   burn_in, seed, initial (gaussian | point:x1,x2,... | file:<path>), output
[[nodiscard]] engine::RunConfig run_config_from(const KeyValueConfig& kv);
[[nodiscard]] ProblemSelection problem_from(const KeyValueConfig& kv);

/// Adds: epsilons, alphas | alpha.count, alpha.min, alpha.max, warm_start,
/// warm_burn_in, replicates, workers, histogram.alphas, histogram.bins,
/// histogram.axes.
[[nodiscard]] SweepConfig sweep_config_from(const KeyValueConfig& kv);

/// Keys accepted by run_config_from() and sweep_config_from().
[[nodiscard]] const std::set<std::string>& run_keys();
[[nodiscard]] const std::set<std::string>& sweep_keys();

/// Textual form of an initial measure, inverse of the `initial` key.
[[nodiscard]] std::string describe(const engine::InitialMeasure& measure);

}  // namespace ipm::cli
