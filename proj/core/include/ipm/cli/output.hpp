#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipm/engine/run_config.hpp"

namespace ipm::cli {

inline constexpr const char* kSummaryHeader = "epsilon,alpha,lambda_hat,stderr,n_replicates,burn_in,M,dt,T,seed";

struct SummaryRow {
  double epsilon = 0.0;
  double alpha = 0.0;
  double lambda_hat = 0.0;
  std::optional<double> standard_error;  // empty unless replicated
  int n_replicates = 1;
  double burn_in = 0.0;
  std::size_t num_particles = 0;
  double dt = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
};

/// One CSV line without the newline; doubles use 17 significant digits.
[[nodiscard]] std::string format_summary_row(const SummaryRow& row);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
[[nodiscard]] std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// Input ensemble of a warm-started run and the run that produced it.
struct ChainLink {
  double epsilon = 0.0;
  std::filesystem::path ensemble;
  std::string hash;
};

struct RunMetadata {
  std::string problem;
  std::map<std::string, std::string> problem_options;
  engine::RunConfig config;
  int replicate = 0;
  std::string burn_in_policy;           // "cold" or "warm"
  std::vector<ChainLink> provenance;    // oldest first; empty for cold starts
  std::optional<std::string> input_hash;
  std::string final_ensemble_hash;
  std::string status = "ok";            // "ok" or "failed"
  std::string error;
  double lambda_hat = 0.0;
  double wall_seconds = 0.0;
  double min_ess = 0.0;
};

/// JSON; doubles are written in shortest round-trip form, so read_run_metadata
/// reproduces the RunConfig bit for bit.
void write_run_metadata(const std::filesystem::path& path, const RunMetadata& meta);
[[nodiscard]] RunMetadata read_run_metadata(const std::filesystem::path& path);

/// Creates `dir` (and parents); IoError when that fails or it is not writable.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace ipm::cli
