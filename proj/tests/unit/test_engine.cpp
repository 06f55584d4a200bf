#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "ipm/engine/ensemble.hpp"
#include "ipm/engine/histogram.hpp"
#include "ipm/engine/ipm.hpp"
#include "ipm/engine/rng.hpp"
#include "ipm/engine/run_config.hpp"
#include "ipm/error.hpp"
#include "ipm/model/builtin.hpp"

using namespace ipm;
using namespace ipm::engine;

namespace {

/// Expected log-mean weights of LE1 for an ensemble that stays centred
/// Gaussian: per coordinate the weight exp(-c |x|^2 dt) with c = (1/4 +
/// alpha(1 - alpha)) / eps shrinks the variance v to v / (1 + 2 dt c v), and
/// the Euler step x + (1 - 2 alpha) dt B x + noise maps it to
/// (1 + (1 - 2 alpha)^2 dt^2) v + 2 eps dt.
std::vector<double> le1_discrete_log_weights(double alpha, double eps, double dt, std::size_t steps, double v0) {
  const double c = (0.25 + alpha * (1.0 - alpha)) / eps;
  std::vector<double> out;
  double v = v0;
  for (std::size_t n = 0; n < steps; ++n) {
    out.push_back(dt - std::log1p(2.0 * dt * c * v));
    v = v / (1.0 + 2.0 * dt * c * v);
    v = (1.0 + (1.0 - 2.0 * alpha) * (1.0 - 2.0 * alpha) * dt * dt) * v + 2.0 * eps * dt;
  }
  return out;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniform pairs do not depend on the batch they are drawn in") {
  const StreamKey key{123456789, 42};
  const std::size_t n = 53;
  std::vector<double> u1(n), u2(n);
  fill_uniform_pairs(key, Domain::user, 3, 0, u1, u2);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> a(1), b(1);
    fill_uniform_pairs(key, Domain::user, 3, i, a, b);
    CHECK(a[0] == u1[i]);
    CHECK(b[0] == u2[i]);
    CHECK(u1[i] > 0.0);
    CHECK(u1[i] < 1.0);
  }
  std::vector<double> other(n), other2(n);
  fill_uniform_pairs(key, Domain::user, 4, 0, other, other2);
  CHECK(other != u1);
}

TEST_CASE("uniform and Gaussian moments") {
  const std::size_t n = 200000;
  std::vector<double> u1(n), u2(n), g(n * 2);
  fill_uniform_pairs({9, 1}, Domain::user, 0, 0, u1, u2);
  const double mu = ipm_test::mean(u1);
  CHECK(std::abs(mu - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  fill_gaussians({9, 2}, Domain::user, n, 2, g);
  double m1 = 0, m2 = 0, m4 = 0, cross = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = g[2 * i], b = g[2 * i + 1];
    m1 += a;
    m2 += a * a;
    m4 += a * a * a * a;
    cross += a * b;
  }
  const double dn = static_cast<double>(n);
  CHECK(std::abs(m1 / dn) < 4.0 / std::sqrt(dn));
  CHECK(std::abs(m2 / dn - 1.0) < 4.0 * std::sqrt(2.0 / dn));
  CHECK(std::abs(m4 / dn - 3.0) < 4.0 * std::sqrt(96.0 / dn));
  CHECK(std::abs(cross / dn) < 4.0 / std::sqrt(dn));
}

TEST_CASE("Gaussian rows are a prefix-stable function of the key") {
  std::vector<double> big(10 * 3), small(5 * 3);
  fill_gaussians({5, 6}, Domain::propagate, 10, 3, big);
  fill_gaussians({5, 6}, Domain::propagate, 5, 3, small);
  CHECK(std::equal(small.begin(), small.end(), big.begin()));
  RandomStream s1({5, 6}, Domain::user), s2({5, 6}, Domain::user);
  for (int i = 0; i < 5; ++i) CHECK(s1.gaussian() == s2.gaussian());
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
}

TEST_CASE("log-sum-exp and effective sample size") {
  const std::vector<double> l{-1.0, 0.5, 2.0, -0.25};
  double naive = 0.0;
  for (double v : l) naive += std::exp(v);
  CHECK(log_mean_weight(l) == doctest::Approx(std::log(naive / 4.0)).epsilon(1e-14));
  // Large offsets must not overflow.
  std::vector<double> shifted(l);
  for (auto& v : shifted) v += 1000.0;
  CHECK(log_mean_weight(shifted) == doctest::Approx(1000.0 + std::log(naive / 4.0)).epsilon(1e-14));

  const double inf = std::numeric_limits<double>::infinity();
  CHECK(log_mean_weight(std::vector<double>{0.0, -inf}) == doctest::Approx(std::log(0.5)));
  CHECK_THROWS_AS((void)log_mean_weight(std::vector<double>{-inf, -inf}), DegenerateEnsembleError);
  CHECK_THROWS_AS((void)log_mean_weight(std::vector<double>{0.0, std::nan("")}), NonFiniteError);
  CHECK_THROWS_AS((void)log_mean_weight(std::vector<double>{0.0, inf}), NonFiniteError);

  CHECK(effective_sample_size(std::vector<double>(10, 3.0)) == doctest::Approx(10.0));
  CHECK(effective_sample_size(std::vector<double>{0.0, -800.0, -800.0}) == doctest::Approx(1.0));
}

TEST_CASE("multinomial counts: support, total and unbiasedness") {
  const std::vector<double> log_w{std::log(0.75), std::log(0.25)};
  const int draws = 20000;
  double sum = 0.0;
  int hist[3] = {0, 0, 0};
  for (int k = 0; k < draws; ++k) {
    const auto c = multinomial_counts(log_w, {77, static_cast<std::uint64_t>(k)});
    REQUIRE(c[0] + c[1] == 2u);
    sum += c[0];
    ++hist[c[0]];
  }
  const double se = std::sqrt(2.0 * 0.75 * 0.25 / draws);
  CHECK(std::abs(sum / draws - 1.5) < 4.0 * se);
  // Binomial(2, 3/4) probabilities 1/16, 6/16, 9/16.
  const double probs[3] = {1.0 / 16, 6.0 / 16, 9.0 / 16};
  for (int j = 0; j < 3; ++j) {
    const double f = static_cast<double>(hist[j]) / draws;
    CHECK(std::abs(f - probs[j]) < 4.0 * std::sqrt(probs[j] * (1 - probs[j]) / draws));
  }

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 1.5);
  const std::size_t m = 40;
  std::vector<double> lw(m);
  for (auto& v : lw) v = nd(rng);
  lw[7] = -std::numeric_limits<double>::infinity();
  double z = 0.0;
  for (double v : lw) z += std::exp(v);
  std::vector<double> acc(m, 0.0);
  const int reps = 4000;
  for (int k = 0; k < reps; ++k) {
    const auto c = multinomial_counts(lw, {5, static_cast<std::uint64_t>(k)});
    CHECK(std::accumulate(c.begin(), c.end(), 0u) == m);
    CHECK(c[7] == 0u);
    for (std::size_t i = 0; i < m; ++i) acc[i] += c[i];
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double p = std::exp(lw[i]) / z;
    const double se = std::sqrt(static_cast<double>(m) * p * (1 - p) / reps);
    CHECK(std::abs(acc[i] / reps - static_cast<double>(m) * p) <= 4.5 * se + 1e-12);
  }
}

TEST_CASE("resampled ensembles keep parent order and the test-function identity") {
  Ensemble e(1, 5);
  for (std::size_t i = 0; i < 5; ++i) e.positions[i] = static_cast<double>(i);
  const std::vector<double> lw{0.0, 1.0, -1.0, 0.5, 2.0};
  const auto r = multinomial_resample(lw, e, {1, 1});
  CHECK(std::is_sorted(r.positions.begin(), r.positions.end()));
  // E[(1/M) sum phi(resampled)] = sum p_m phi(q_m) for phi(x) = x^2.
  double z = 0.0, target = 0.0;
  for (std::size_t i = 0; i < 5; ++i) z += std::exp(lw[i]);
  for (std::size_t i = 0; i < 5; ++i) target += std::exp(lw[i]) / z * e.positions[i] * e.positions[i];
  std::vector<double> samples;
  for (int k = 0; k < 20000; ++k) {
    const auto s = multinomial_resample(lw, e, {2, static_cast<std::uint64_t>(k)});
    double phi = 0.0;
    for (double x : s.positions) phi += x * x;
    samples.push_back(phi / 5.0);
  }
  CHECK(std::abs(ipm_test::mean(samples) - target) < 3.0 * ipm_test::sample_sd(samples) / std::sqrt(20000.0));
}

TEST_CASE("Euler-Maruyama step with supplied noise") {
  const auto p = model::builtin_problem("LE1");
  Ensemble e(2, 3);
  e.positions = {1.0, 0.0, 0.0, 2.0, -1.0, 1.0};
  const std::vector<double> noise{0.5, -0.5, 1.0, 0.0, 0.0, 2.0};
  const double dt = 0.01, eps = 0.2, alpha = 0.1;
  Ensemble expected = e;
  for (std::size_t i = 0; i < 3; ++i) {
    const double x1 = e.positions[2 * i], x2 = e.positions[2 * i + 1];
    expected.positions[2 * i] = x1 + (1 - 2 * alpha) * x2 * dt + std::sqrt(2 * eps * dt) * noise[2 * i];
    expected.positions[2 * i + 1] = x2 - (1 - 2 * alpha) * x1 * dt + std::sqrt(2 * eps * dt) * noise[2 * i + 1];
  }
  em_step(e, *p, {eps, alpha}, dt, noise);
  CHECK(e.step == 1u);
  for (std::size_t k = 0; k < 6; ++k) CHECK(e.positions[k] == doctest::Approx(expected.positions[k]).epsilon(1e-15));

  // The seeded step draws from StreamKey{seed, step + 1} in the propagate domain.
  Ensemble a(2, 3), b(2, 3);
  a.positions = b.positions = {1.0, 0.0, 0.0, 2.0, -1.0, 1.0};
  a.step = b.step = 4;
  std::vector<double> g(6);
  fill_gaussians({99, 5}, Domain::propagate, 3, 2, g);
  em_step(a, *p, {eps, alpha}, dt, 99);
  em_step(b, *p, {eps, alpha}, dt, g);
  CHECK(a.positions == b.positions);
}

TEST_CASE("non-finite drift is reported with the particle") {
  model::ProblemFunctions fn;
  fn.potential = [](std::span<const double> x) { return x[0] * x[0]; };
  fn.grad_potential = [](std::span<const double> x, std::span<double> g) { g[0] = 2 * x[0]; };
  fn.laplacian_potential = [](std::span<const double>) { return 2.0; };
  fn.drift = [](std::span<const double> x, std::span<double> b) { b[0] = x[0] > 1.0 ? std::nan("") : 0.0; };
  fn.div_drift = [](std::span<const double>) { return 0.0; };
  model::FunctionalProblem p("bad", 1, fn);
  Ensemble e(1, 4);
  e.positions = {0.0, 0.5, 2.0, 0.1};
  try {
    em_step(e, p, {0.1, 0.0}, 0.01, 1);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& err) {
    CHECK(std::string(err.what()).find("particle 2") != std::string::npos);
  }
}

TEST_CASE("run_ipm equals the composed public operations bit for bit") {
  for (const char* name : {"LE1", "E2", "E3"}) {
    CAPTURE(name);
    model::ProblemOptions opts;
    opts.e3_dim = 4;
    const auto p = model::builtin_problem(name, opts);
    RunConfig cfg;
    cfg.epsilon = 0.05;
    cfg.alpha = 0.3;
    cfg.num_particles = 301;
    cfg.dt = 0.03125;
    cfg.horizon = 2.0;
    cfg.burn_in = 0.5;
    cfg.seed = 2024;
    Ensemble final_fused;
    RunObserver obs;
    obs.on_final = [&](const Ensemble& e) { final_fused = e; };
    const auto fused = run_ipm(*p, cfg, obs);

    Ensemble e = init_ensemble(cfg, *p);
    std::vector<double> series;
    const auto params = cfg.weight_params();
    for (std::uint64_t n = 1; n <= cfg.num_steps(); ++n) {
      const auto lw = compute_log_weights(e, *p, params, cfg.dt);
      series.push_back(log_mean_weight(lw));
      em_step(e, *p, params, cfg.dt, cfg.seed);
      e = multinomial_resample(lw, e, {cfg.seed, n});
    }
    CHECK(series == fused.per_step);
    CHECK(e.positions == final_fused.positions);
    CHECK(e.step == final_fused.step);
    CHECK(fused.lambda_hat == estimate_from_series(series, cfg.burn_in_steps(), cfg.dt));
  }
}

TEST_CASE("runs are reproducible and seed-dependent") {
  const auto p = model::builtin_problem("E1");
  RunConfig cfg;
  cfg.num_particles = 500;
  cfg.horizon = 1.0;
  cfg.seed = 8;
  const auto a = run_ipm(*p, cfg);
  const auto b = run_ipm(*p, cfg);
  CHECK(a.per_step == b.per_step);
  cfg.seed = 9;
  const auto c = run_ipm(*p, cfg);
  CHECK(a.per_step != c.per_step);
}

TEST_CASE("LE1 log-mean weights follow the exact Gaussian recursion") {
  const double alpha = 0.25, eps = 0.1, dt = 0.0625;
  RunConfig cfg;
  cfg.epsilon = eps;
  cfg.alpha = alpha;
  cfg.num_particles = 50000;
  cfg.dt = dt;
  cfg.horizon = 16.0;
  cfg.initial_measure = PointMass{{0.0, 0.0}};
  const auto p = model::builtin_problem("LE1");
  const auto expected = le1_discrete_log_weights(alpha, eps, dt, cfg.num_steps(), 0.0);
  const double oracle = std::accumulate(expected.begin(), expected.end(), 0.0) / expected.size() / dt;
  std::vector<double> estimates;
  for (std::uint64_t s = 0; s < 8; ++s) {
    cfg.seed = s;
    const auto r = run_ipm(*p, cfg);
    estimates.push_back(r.lambda_hat);
    // The first step is deterministic: every particle sits at the origin.
    CHECK(r.per_step[0] == doctest::Approx(expected[0]).epsilon(1e-14));
  }
  const double se = ipm_test::sample_sd(estimates) / std::sqrt(8.0);
  CAPTURE(oracle);
  CAPTURE(ipm_test::mean(estimates));
  CHECK(std::abs(ipm_test::mean(estimates) - oracle) < 4.0 * se);
}

TEST_CASE("run configuration validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.num_steps() == 65536u);
  c.horizon = 1.001;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.horizon = 4.0;
  c.burn_in = 4.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.burn_in = 2.0;
  CHECK(c.burn_in_steps() == 256u);
  c.num_particles = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.num_particles = 10;
  c.initial_measure = PointMass{{0.0, 0.0, 0.0}};
  const auto p = model::builtin_problem("LE1");
  CHECK_THROWS_AS((void)init_ensemble(c, *p), ConfigError);
}

TEST_CASE("ensemble files round-trip exactly and warm-start a run") {
  ipm_test::TempDir dir("ensemble");
  const auto p = model::builtin_problem("E2");
  RunConfig cfg;
  cfg.num_particles = 64;
  cfg.horizon = 0.5;
  Ensemble last;
  RunObserver obs;
  obs.on_final = [&](const Ensemble& e) { last = e; };
  (void)run_ipm(*p, cfg, obs);
  save_ensemble(dir / "e.csv", last, {"E2", 0.1, 0.0, 0});
  const auto loaded = load_ensemble(dir / "e.csv");
  CHECK(loaded.ensemble.positions == last.positions);
  CHECK(loaded.ensemble.step == last.step);
  CHECK(loaded.header.problem == "E2");
  CHECK(file_hash(dir / "e.csv").size() == 16);
  CHECK(file_hash(dir / "e.csv") == file_hash(dir / "e.csv"));

  cfg.initial_measure = FromFile{dir / "e.csv"};
  const Ensemble start = init_ensemble(cfg, *p);
  CHECK(start.positions == last.positions);

  std::ofstream(dir / "bad.csv") << "d,M,problem,epsilon,alpha,seed,step\n2,2,E2,0.1,0,0,0\n1,2\n3\n";
  CHECK_THROWS_AS((void)load_ensemble(dir / "bad.csv"), IoError);
  std::ofstream(dir / "nan.csv") << "d,M,problem,epsilon,alpha,seed,step\n1,1,E2,0.1,0,0,0\nnan\n";
  CHECK_THROWS_AS((void)load_ensemble(dir / "nan.csv"), NonFiniteError);
  cfg.num_particles = 65;
  CHECK_THROWS_AS((void)init_ensemble(cfg, *p), ConfigError);
}

TEST_CASE("density histogram") {
  Ensemble e(2, 4);
  e.positions = {0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.5, 0.5};
  const auto h = final_density(e, {0, 1}, {2, 2});
  double total = 0.0;
  for (double v : h.mass) total += v;
  CHECK(total == doctest::Approx(1.0));
  CHECK(h.at(1, 1) == doctest::Approx(0.5));  // (1, 1) on the upper edge and (0.5, 0.5) on the midpoint
  Ensemble point(2, 3);
  const auto hp = final_density(point, {0, 1}, {4, 4});
  CHECK(hp.edges_x.front() == doctest::Approx(-0.5));
  CHECK(hp.edges_x.back() == doctest::Approx(0.5));
  const auto clipped = final_density(e, {0, 1}, {2, 2}, Box{{0.0, 0.0}, {0.75, 0.75}});
  CHECK(clipped.at(0, 0) == doctest::Approx(0.5));
  ipm_test::TempDir dir("hist");
  write_histogram_csv(dir / "h.csv", h);
  CHECK(std::filesystem::file_size(dir / "h.csv") > 0);
}

}  // TEST_SUITE
