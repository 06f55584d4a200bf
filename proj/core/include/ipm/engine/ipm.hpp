#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ipm/engine/ensemble.hpp"
#include "ipm/engine/rng.hpp"
#include "ipm/engine/run_config.hpp"
#include "ipm/model/problem.hpp"

namespace ipm::engine {

/// M i.i.d. draws from the configured initial measure. Gaussian draws use
/// StreamKey{seed, 0}.
[[nodiscard]] Ensemble init_ensemble(const RunConfig& config, const model::ProblemSpec& problem);

/// One Euler-Maruyama step in place:
///   x <- x + (1 - 2 alpha) b(x) dt + sqrt(2 eps dt) G,
/// then ensemble.step is incremented. G for particle i is drawn from
/// StreamKey{seed, ensemble.step} (the incremented value) at counter i.
/// Only eps >= 0 is required here.
void em_step(Ensemble& ensemble, const model::ProblemSpec& problem, const model::WeightParams& params,
             double dt, std::uint64_t seed);

/// Same update with caller-supplied standard normals (row-major, M x d).
void em_step(Ensemble& ensemble, const model::ProblemSpec& problem, const model::WeightParams& params,
             double dt, std::span<const double> noise);

/// l_m = dt U(q_m). Throws NonFiniteError naming the first bad particle.
[[nodiscard]] std::vector<double> compute_log_weights(const Ensemble& ensemble,
                                                      const model::ProblemSpec& problem,
                                                      const model::WeightParams& params, double dt);

/// log((1/M) sum exp(l_m)) by max-shifted log-sum-exp. Entries may be -inf,
/// but not all of them.
[[nodiscard]] double log_mean_weight(std::span<const double> log_weights);

/// 1 / sum p_m^2 for p proportional to exp(l).
[[nodiscard]] double effective_sample_size(std::span<const double> log_weights);

/// Multinomial(M, p) counts with p_m proportional to exp(l_m).
[[nodiscard]] std::vector<std::uint32_t> multinomial_counts(std::span<const double> log_weights,
                                                            StreamKey key);

/// Ensemble holding K_m copies of particle m, (K_m) ~ Multinomial(M, p).
/// Copies keep the ordering of their parents.
[[nodiscard]] Ensemble multinomial_resample(std::span<const double> log_weights,
                                            const Ensemble& ensemble, StreamKey key);

struct EigenvalueResult {
  double lambda_hat = 0.0;
  std::vector<double> per_step;   // log-mean weight of step n = 1..N
  std::vector<double> ess_trace;  // effective sample size of step n
  RunConfig config;
  std::string problem;
  double wall_seconds = 0.0;
};

struct RunObserver {
  /// Called after the weights of step n (1-based) are known.
  std::function<void(std::uint64_t n, double log_mean_weight, double ess)> on_step;
  /// Called once with the final resampled ensemble.
  std::function<void(const Ensemble&)> on_final;
};

/// The interacting particle method. Step n weights the particles at their
/// pre-move positions, moves them by em_step and resamples with
/// StreamKey{seed, n}; the estimate is the mean of the retained log-mean
/// weights divided by dt. Bit-identical to composing the operations above.
[[nodiscard]] EigenvalueResult run_ipm(const model::ProblemSpec& problem, const RunConfig& config,
                                       const RunObserver& observer = {});

/// As above, starting from `initial` instead of config.initial_measure.
[[nodiscard]] EigenvalueResult run_ipm(const model::ProblemSpec& problem, const RunConfig& config,
                                       Ensemble initial, const RunObserver& observer = {});

/// Estimator from a per-step series: mean of entries with index >= burn_in_steps, over dt.
[[nodiscard]] double estimate_from_series(std::span<const double> per_step,
                                          std::uint64_t burn_in_steps, double dt);

}  // namespace ipm::engine
