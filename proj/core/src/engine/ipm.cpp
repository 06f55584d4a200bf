#include "ipm/engine/ipm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

#include "engine/kernels.hpp"
#include "engine/streams.hpp"
#include "ipm/error.hpp"

namespace ipm::engine {
namespace {

constexpr std::size_t kChunk = 512;

std::string format_row(std::span<const double> x) {
  std::string s = "(";
  char buf[32];
  for (std::size_t k = 0; k < x.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", x[k]);
    s += (k ? ", " : "");
    s += buf;
  }
  return s + ")";
}

void check_dim(const Ensemble& ensemble, const model::ProblemSpec& problem) {
  if (ensemble.dim != problem.dim()) {
    throw ConfigError("ensemble dimension " + std::to_string(ensemble.dim) +
                      " does not match problem " + problem.name() + " of dimension " +
                      std::to_string(problem.dim()));
  }
  if (ensemble.size() == 0) throw ConfigError("empty ensemble");
}

struct WeightStats {
  double shift;
  double sum;
  double sum_sq;
};

/// w = exp(l - max l). Rejects NaN, +inf and all -inf.
WeightStats exponentiate(std::span<const double> log_w, double* w) {
  if (log_w.empty()) throw ConfigError("log-weights must be nonempty");
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    const double v = log_w[i];
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw NonFiniteError("log-weight " + std::to_string(i) + " is not finite");
    }
    shift = std::max(shift, v);
  }
  if (shift == -std::numeric_limits<double>::infinity()) {
    throw DegenerateEnsembleError("all weights are zero");
  }
  WeightStats s{shift, 0.0, 0.0};
  s.sum = kernels::exp_shifted(log_w.data(), log_w.size(), shift, w, &s.sum_sq);
  return s;
}

double log_mean(const WeightStats& s, std::size_t m) {
  return s.shift + std::log(s.sum / static_cast<double>(m));
}

/// Smallest j >= from with cdf[j] > t; cdf must end in kSearchPad entries of +inf.
constexpr std::size_t kSearchPad = 16;

inline std::size_t first_above(const double* cdf, std::size_t from, double t) {
  std::size_t j = from;
#if defined(__AVX512F__)
  const __m512d tv = _mm512_set1_pd(t);
  for (;;) {
    const __mmask8 lo = _mm512_cmp_pd_mask(_mm512_loadu_pd(cdf + j), tv, _CMP_LE_OQ);
    const __mmask8 hi = _mm512_cmp_pd_mask(_mm512_loadu_pd(cdf + j + 8), tv, _CMP_LE_OQ);
    const int c = __builtin_popcount(lo) + __builtin_popcount(hi);
    j += static_cast<std::size_t>(c);
    if (c < 16) return j;
  }
#else
  while (cdf[j] <= t) ++j;
  return j;
#endif
}

/// Buffers for drawing multinomial indices.
struct ResampleScratch {
  std::vector<double> cdf, targets, u1, u2, e1, e2;
  std::vector<std::uint32_t> guide;

  void resize(std::size_t m) {
    const std::size_t half = (m + 2) / 2;
    cdf.resize(m + kSearchPad);
    targets.resize(m);
    guide.resize(m);
    u1.resize(half);
    u2.resize(half);
    e1.resize(half);
    e2.resize(half);
  }
};

/// idx[k], k < M, are M multinomial draws from p proportional to w, in
/// nondecreasing order. Sorted uniforms come from normalized partial sums of
/// M + 1 exponential spacings; a guide table then bounds each inverse-CDF
/// search to a few entries.
void resample_indices(const double* w, std::size_t m, StreamKey key, ResampleScratch& s,
                      std::uint32_t* idx) {
  s.resize(m);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < m; ++j) {
    acc += w[j];
    s.cdf[j] = acc;
    if (w[j] > 0.0) last_positive = j;
  }
  const double total = acc;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateEnsembleError("total resampling weight is " + std::to_string(total));
  }

  const std::size_t half = s.u1.size();
  fill_uniform_pairs(key, Domain::resample, 0, 0, s.u1, s.u2);
  kernels::neg_log(s.u1.data(), half, s.e1.data());
  kernels::neg_log(s.u2.data(), half, s.e2.data());
  double run = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    run += (k & 1) ? s.e2[k >> 1] : s.e1[k >> 1];
    s.targets[k] = run;
  }
  run += (m & 1) ? s.e2[m >> 1] : s.e1[m >> 1];
  const double scale = total / run;
  for (std::size_t k = 0; k < m; ++k) s.targets[k] *= scale;

  // guide[i] = first j with cdf[j] > i * total / M.
  const double cell = total / static_cast<double>(m);
  {
    std::size_t j = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double threshold = static_cast<double>(i) * cell;
      while (j < last_positive && s.cdf[j] <= threshold) ++j;
      s.guide[i] = static_cast<std::uint32_t>(j);
    }
  }
  // Past the last positive weight the CDF reads +inf, which bounds every search.
  std::fill(s.cdf.begin() + static_cast<std::ptrdiff_t>(last_positive), s.cdf.end(),
            std::numeric_limits<double>::infinity());
  const double inv_cell = 1.0 / cell;
  for (std::size_t k = 0; k < m; ++k) {
    const double t = s.targets[k];
    // One cell of slack keeps the guide a lower bound under rounding.
    auto g = static_cast<std::size_t>(t * inv_cell);
    g = g > 0 ? std::min(g - 1, m - 1) : 0;
    idx[k] = static_cast<std::uint32_t>(first_above(s.cdf.data(), s.guide[g], t));
  }
}

void gather(const double* from, int dim, const std::uint32_t* idx, std::size_t m, double* to) {
  if (dim == 2) {
    for (std::size_t k = 0; k < m; ++k) {
      to[2 * k] = from[2 * idx[k]];
      to[2 * k + 1] = from[2 * idx[k] + 1];
    }
    return;
  }
  const auto d = static_cast<std::size_t>(dim);
  for (std::size_t k = 0; k < m; ++k) std::copy_n(from + idx[k] * d, d, to + k * d);
}

[[noreturn]] void throw_bad_drift(const double* positions, const double* drift, std::size_t m,
                                  std::size_t d) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      if (!std::isfinite(drift[i * d + k])) {
        throw NonFiniteError("non-finite drift at particle " + std::to_string(i) + ", x = " +
                             format_row({positions + i * d, d}));
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      if (!std::isfinite(positions[i * d + k])) {
        throw NonFiniteError("particle " + std::to_string(i) + " left the finite range");
      }
    }
  }
  throw NonFiniteError("non-finite Euler-Maruyama update");
}

/// moved = x + (1 - 2 alpha) b dt + sqrt(2 eps dt) G with G from `key`, or
/// from `noise` when it is nonempty.
void propagate(const double* x, const double* drift, std::size_t m, int dim,
               const model::WeightParams& params, double dt, StreamKey key,
               std::span<const double> noise, double* moved) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive and finite");
  if (!(params.epsilon >= 0.0) || !std::isfinite(params.epsilon)) {
    throw ConfigError("epsilon must be finite and >= 0");
  }
  const auto d = static_cast<std::size_t>(dim);
  const double dr = (1.0 - 2.0 * params.alpha) * dt;
  const double amp = std::sqrt(2.0 * params.epsilon * dt);
  // A non-finite value turns the sum of v * 0 into NaN.
  double poison = 0.0;
  if (!noise.empty()) {
    for (std::size_t i = 0; i < m * d; ++i) {
      const double v = x[i] + dr * drift[i] + amp * noise[i];
      moved[i] = v;
      poison += v * 0.0 + drift[i] * 0.0;
    }
    if (poison != 0.0) throw_bad_drift(x, drift, m, d);
    return;
  }

  const std::size_t pairs = (d + 1) / 2;
  double u1[kChunk], u2[kChunk], g1[kChunk], g2[kChunk];
  for (std::size_t r0 = 0; r0 < m; r0 += kChunk) {
    const std::size_t rows = std::min(kChunk, m - r0);
    for (std::size_t p = 0; p < pairs; ++p) {
      const auto w = detail::stream_words(key, Domain::propagate, static_cast<std::uint32_t>(p));
      kernels::uniform_pairs(static_cast<std::uint32_t>(r0), w.c1, w.c2, w.c3, w.k0, w.k1, rows, u1, u2);
      kernels::box_muller(u1, u2, rows, g1, g2);
      const std::size_t c = 2 * p;
      const double* __restrict xs = x + r0 * d;
      const double* __restrict bs = drift + r0 * d;
      double* __restrict out = moved + r0 * d;
      if (c + 1 < d) {
        for (std::size_t i = 0; i < rows; ++i) {
          const double v0 = xs[i * d + c] + dr * bs[i * d + c] + amp * g1[i];
          const double v1 = xs[i * d + c + 1] + dr * bs[i * d + c + 1] + amp * g2[i];
          out[i * d + c] = v0;
          out[i * d + c + 1] = v1;
          poison += v0 * 0.0 + v1 * 0.0 + bs[i * d + c] * 0.0 + bs[i * d + c + 1] * 0.0;
        }
      } else {
        for (std::size_t i = 0; i < rows; ++i) {
          const double v0 = xs[i * d + c] + dr * bs[i * d + c] + amp * g1[i];
          out[i * d + c] = v0;
          poison += v0 * 0.0 + bs[i * d + c] * 0.0;
        }
      }
    }
  }
  if (poison != 0.0) throw_bad_drift(x, drift, m, d);
}

/// l = dt U; throws on the first non-finite entry.
void scale_log_weights(const double* u, std::size_t m, double dt, const Ensemble& ensemble,
                       double* out) {
  double poison = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = dt * u[i];
    poison += u[i] * 0.0;
  }
  if (poison == 0.0) return;
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(u[i])) {
      throw NonFiniteError("non-finite weight potential at particle " + std::to_string(i) +
                           ", x = " + format_row(ensemble.row(i)));
    }
  }
}

void em_step_impl(Ensemble& ensemble, const model::ProblemSpec& problem,
                  const model::WeightParams& params, double dt, std::uint64_t seed,
                  std::span<const double> noise) {
  check_dim(ensemble, problem);
  const std::size_t m = ensemble.size();
  std::vector<double> drift(ensemble.positions.size()), u(m), moved(ensemble.positions.size());
  problem.evaluate_batch(ensemble.positions, params, drift, u);
  const StreamKey key{seed, ensemble.step + 1};
  propagate(ensemble.positions.data(), drift.data(), m, ensemble.dim, params, dt, key, noise,
            moved.data());
  ensemble.positions.swap(moved);
  ++ensemble.step;
}

}  // namespace

Ensemble init_ensemble(const RunConfig& config, const model::ProblemSpec& problem) {
  const int d = problem.dim();
  const std::size_t m = config.num_particles;
  if (m < 1) throw ConfigError("num_particles must be >= 1");
  Ensemble e(d, m);
  if (std::holds_alternative<StandardGaussian>(config.initial_measure)) {
    fill_gaussians(StreamKey{config.seed, 0}, Domain::initial, m, d, e.positions);
  } else if (const auto* p = std::get_if<PointMass>(&config.initial_measure)) {
    if (p->x0.size() != static_cast<std::size_t>(d)) {
      throw ConfigError("point mass has dimension " + std::to_string(p->x0.size()) +
                        ", problem " + problem.name() + " has " + std::to_string(d));
    }
    for (std::size_t i = 0; i < m; ++i) std::copy(p->x0.begin(), p->x0.end(), e.row(i).begin());
  } else {
    const auto& path = std::get<FromFile>(config.initial_measure).path;
    LoadedEnsemble loaded = load_ensemble(path);
    if (loaded.ensemble.dim != d) {
      throw ConfigError("ensemble file " + path.string() + " has dimension " +
                        std::to_string(loaded.ensemble.dim) + ", problem " + problem.name() +
                        " has " + std::to_string(d));
    }
    if (loaded.ensemble.size() != m) {
      throw ConfigError("ensemble file " + path.string() + " holds " +
                        std::to_string(loaded.ensemble.size()) + " particles, config asks for " +
                        std::to_string(m));
    }
    e.positions = std::move(loaded.ensemble.positions);
  }
  return e;
}

void em_step(Ensemble& ensemble, const model::ProblemSpec& problem, const model::WeightParams& params,
             double dt, std::uint64_t seed) {
  em_step_impl(ensemble, problem, params, dt, seed, {});
}

void em_step(Ensemble& ensemble, const model::ProblemSpec& problem, const model::WeightParams& params,
             double dt, std::span<const double> noise) {
  if (noise.size() != ensemble.positions.size()) {
    throw ConfigError("noise must hold M x d values");
  }
  em_step_impl(ensemble, problem, params, dt, 0, noise);
}

std::vector<double> compute_log_weights(const Ensemble& ensemble, const model::ProblemSpec& problem,
                                        const model::WeightParams& params, double dt) {
  check_dim(ensemble, problem);
  params.validate();
  const std::size_t m = ensemble.size();
  std::vector<double> drift(ensemble.positions.size()), u(m), out(m);
  problem.evaluate_batch(ensemble.positions, params, drift, u);
  scale_log_weights(u.data(), m, dt, ensemble, out.data());
  return out;
}

double log_mean_weight(std::span<const double> log_weights) {
  std::vector<double> w(log_weights.size());
  return log_mean(exponentiate(log_weights, w.data()), log_weights.size());
}

double effective_sample_size(std::span<const double> log_weights) {
  std::vector<double> w(log_weights.size());
  const WeightStats s = exponentiate(log_weights, w.data());
  return s.sum * s.sum / s.sum_sq;
}

std::vector<std::uint32_t> multinomial_counts(std::span<const double> log_weights, StreamKey key) {
  const std::size_t m = log_weights.size();
  std::vector<double> w(m);
  exponentiate(log_weights, w.data());
  ResampleScratch scratch;
  std::vector<std::uint32_t> idx(m), counts(m, 0);
  resample_indices(w.data(), m, key, scratch, idx.data());
  for (std::uint32_t j : idx) ++counts[j];
  return counts;
}

Ensemble multinomial_resample(std::span<const double> log_weights, const Ensemble& ensemble,
                              StreamKey key) {
  const std::size_t m = ensemble.size();
  if (log_weights.size() != m) throw ConfigError("one log-weight per particle required");
  std::vector<double> w(m);
  exponentiate(log_weights, w.data());
  ResampleScratch scratch;
  std::vector<std::uint32_t> idx(m);
  resample_indices(w.data(), m, key, scratch, idx.data());
  Ensemble out(ensemble.dim, m);
  out.step = ensemble.step;
  gather(ensemble.positions.data(), ensemble.dim, idx.data(), m, out.positions.data());
  return out;
}

double estimate_from_series(std::span<const double> per_step, std::uint64_t burn_in_steps, double dt) {
  if (burn_in_steps >= per_step.size()) throw ConfigError("burn-in covers the whole series");
  double sum = 0.0;
  for (std::size_t n = burn_in_steps; n < per_step.size(); ++n) sum += per_step[n];
  return sum / static_cast<double>(per_step.size() - burn_in_steps) / dt;
}

EigenvalueResult run_ipm(const model::ProblemSpec& problem, const RunConfig& config,
                         const RunObserver& observer) {
  config.validate();
  return run_ipm(problem, config, init_ensemble(config, problem), observer);
}

EigenvalueResult run_ipm(const model::ProblemSpec& problem, const RunConfig& config, Ensemble initial,
                         const RunObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  check_dim(initial, problem);
  if (initial.size() != config.num_particles) {
    throw ConfigError("initial ensemble holds " + std::to_string(initial.size()) +
                      " particles, config asks for " + std::to_string(config.num_particles));
  }
  const model::WeightParams params = config.weight_params();
  const std::size_t m = config.num_particles;
  const std::uint64_t steps = config.num_steps();
  const double dt = config.dt;

  Ensemble ens = std::move(initial);
  ens.step = 0;
  std::vector<double> drift(ens.positions.size()), u(m), log_w(m), w(m), moved(ens.positions.size());
  std::vector<std::uint32_t> idx(m);
  ResampleScratch scratch;

  EigenvalueResult result;
  result.config = config;
  result.problem = problem.name();
  result.per_step.reserve(steps);
  result.ess_trace.reserve(steps);

  for (std::uint64_t n = 1; n <= steps; ++n) {
    problem.evaluate_batch(ens.positions, params, drift, u);
    scale_log_weights(u.data(), m, dt, ens, log_w.data());
    const WeightStats stats = exponentiate(log_w, w.data());
    const double lambda_n = log_mean(stats, m);
    if (!std::isfinite(lambda_n)) {
      throw NonFiniteError("non-finite log-mean weight at step " + std::to_string(n));
    }
    const double ess = stats.sum * stats.sum / stats.sum_sq;
    result.per_step.push_back(lambda_n);
    result.ess_trace.push_back(ess);
    if (observer.on_step) observer.on_step(n, lambda_n, ess);

    const StreamKey key{config.seed, n};
    propagate(ens.positions.data(), drift.data(), m, ens.dim, params, dt, key, {}, moved.data());
    resample_indices(w.data(), m, key, scratch, idx.data());
    gather(moved.data(), ens.dim, idx.data(), m, ens.positions.data());
    ens.step = n;
  }

  result.lambda_hat = estimate_from_series(result.per_step, config.burn_in_steps(), dt);
  if (observer.on_final) observer.on_final(ens);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace ipm::engine
