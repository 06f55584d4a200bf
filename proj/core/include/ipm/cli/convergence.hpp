#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ipm/cli/sweep.hpp"
#include "ipm/cli/sweep_config.hpp"
#include "ipm/engine/run_config.hpp"

namespace ipm::cli {

enum class Axis { horizon, step };

[[nodiscard]] const char* to_string(Axis axis) noexcept;
/// "T" / "horizon" or "dt" / "step".
[[nodiscard]] Axis parse_axis(const std::string& text);

struct ConvergenceConfig {
  ProblemSelection problem;  // LE1 or LE2
  Axis axis = Axis::horizon;
  std::vector<double> grid;
  engine::RunConfig fixed;    // the axis field is overwritten per grid point
  int replicates = 20;
  std::string burn_in = "0";  // evaluated against each point's horizon
  int workers = 1;
};

struct ConvergencePoint {
  double value = 0.0;
  double mean_error = 0.0;    // mean over replicates of |lambda_hat - exact|
  double error_stderr = 0.0;  // standard error of that mean
  double mean_lambda = 0.0;
  std::vector<double> lambdas;
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double halfwidth = 0.0;  // 95% Student-t half-width of the slope
};

/// Least squares of log(error) on log(value). Needs 3 points and positive data.
[[nodiscard]] LogLogFit fit_log_log(std::span<const double> values, std::span<const double> errors);

struct ConvergenceReport {
  Axis axis = Axis::horizon;
  std::string problem;
  double exact = 0.0;
  std::vector<ConvergencePoint> points;  // sorted by value
  LogLogFit fit;
};

/// lambda for LE1 (closed form) and LE2 (Riccati); ConfigError otherwise.
[[nodiscard]] double exact_eigenvalue(const ProblemSelection& problem, double alpha);

/// Runs `replicates` seeds per grid point (replicate r uses replicate_seed())
/// and fits the error decay. ConfigError for a grid of fewer than 3 points or
/// a problem without an exact eigenvalue; a failed run is a runtime error.
[[nodiscard]] ConvergenceReport convergence_harness(const ConvergenceConfig& config, const Logger& log = {});

/// CSV `value,mean_abs_error,error_stderr,mean_lambda,replicates`.
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report);
/// Axis, exact value, fitted slope and half-width, per-point replicate values.
void write_convergence_json(const std::filesystem::path& path, const ConvergenceReport& report);

struct BurnInComparison {
  std::vector<double> error_without;
  std::vector<double> error_with;
  int wins = 0;  // replicates where the burn-in error is not larger
  [[nodiscard]] double win_fraction() const {
    return error_with.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(error_with.size());
  }
};

/// Matched-seed comparison of burn-in 0 against `burn_in` (e.g. "T/2").
[[nodiscard]] BurnInComparison burn_in_ab(const ProblemSelection& problem, const engine::RunConfig& fixed,
                                          const std::string& burn_in, int replicates, int workers = 1);

}  // namespace ipm::cli
