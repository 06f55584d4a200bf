#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ipm/cli/output.hpp"
#include "ipm/cli/sweep_config.hpp"
#include "ipm/model/problem.hpp"

namespace ipm::cli {

using Logger = std::function<void(const std::string&)>;

/// One run of a sweep or of `ipm run`.
struct RunTask {
  engine::RunConfig config;
  int replicate = 0;
  std::filesystem::path dir;
  std::string burn_in_policy = "cold";
  std::vector<ChainLink> provenance;
};

/// Runs the IPM and writes metadata.json, per_step.csv and final_ensemble.csv
/// into task.dir. Errors of the run itself are caught and reported through
/// status/error in the returned (and written) metadata.
[[nodiscard]] RunMetadata execute_run(const model::ProblemSpec& problem, const ProblemSelection& selection,
                                      const RunTask& task);

struct SweepFailure {
  double epsilon = 0.0;
  double alpha = 0.0;
  int replicate = 0;
  std::string error;
};

struct SweepResult {
  std::vector<SummaryRow> rows;  // epsilon-major, alpha-minor
  std::vector<SweepFailure> failures;
  std::filesystem::path output_dir;
};

/// Output layout under config.output_dir:
///   config.resolved                  frozen configuration (when given)
///   summary.csv                      one row per (epsilon, alpha) with a successful run
///   failures.csv                     epsilon,alpha,replicate,error
///   runs/e<k>_a<j>_r<r>/             metadata.json, per_step.csv, final_ensemble.csv
///   curve_e<k>.csv, rate_e<k>.csv    IPM curve and its Legendre transform
///   rescaled_rate_e<k>.csv           (s', eps I(s' / eps))
///   symmetry_e<k>.json               Gallavotti-Cohen diagnostics
///   reference.csv, reference_rate.csv   when the problem has a reference curve
///   orthogonal_Q.csv                 for E3
///   histogram_e<k>_a<j>.csv          for the configured histogram alphas
/// Stages run in epsilon order; within a stage runs are spread over
/// config.workers threads. A warm-started run at stage k > 0 reads the final
/// ensemble of the same (alpha, replicate) from stage k - 1.
[[nodiscard]] SweepResult run_sweep(const SweepConfig& config, const std::string& resolved_config = {},
                                    const Logger& log = {});

/// 0 when every run succeeded, 3 otherwise.
[[nodiscard]] int exit_code(const SweepResult& result);

/// Replicate r uses the base seed for r = 0 and mix_seed(seed, r) otherwise.
[[nodiscard]] std::uint64_t replicate_seed(std::uint64_t seed, int replicate);

/// Summary row of one run or of a set of replicates of the same (epsilon, alpha).
[[nodiscard]] SummaryRow summarize(const engine::RunConfig& config, std::uint64_t base_seed,
                                   const std::vector<double>& lambdas);

}  // namespace ipm::cli
