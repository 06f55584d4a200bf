#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ipm/cli/convergence.hpp"
#include "ipm/cli/key_value.hpp"
#include "ipm/cli/output.hpp"
#include "ipm/cli/sweep.hpp"
#include "ipm/cli/sweep_config.hpp"
#include "ipm/engine/ensemble.hpp"
#include "ipm/error.hpp"

using namespace ipm;
using namespace ipm::cli;

namespace {

KeyValueConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in, "test");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

SweepConfig tiny_sweep(const std::filesystem::path& out) {
  SweepConfig c;
  c.problem.name = "LE1";
  c.alphas = {0.0, 0.25, 0.5};
  c.epsilons = {0.1, 0.05};
  c.run.num_particles = 200;
  c.run.dt = 0.0625;
  c.run.horizon = 4.0;
  c.run.seed = 11;
  c.output_dir = out;
  return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("key-value parsing") {
  const auto kv = parse_text(
      "# comment\n"
      "problem = E2\n"
      "problem.a = 1\n"
      "dt = 2^-7   # trailing comment\n"
      "alphas = 0, 0.5 ,1\n"
      "warm_start = true\n"
      "\n");
  CHECK(kv.get_string("problem", "") == "E2");
  CHECK(kv.get_double("dt", 0.0) == 0.0078125);
  CHECK(kv.get_doubles("alphas", {}) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(kv.get_bool("warm_start", false));
  CHECK(kv.get_int("missing", 7) == 7);
  CHECK(kv.with_prefix("problem.") == std::map<std::string, std::string>{{"a", "1"}});
  CHECK(parse_number("2^3", "x") == 8.0);
  CHECK(parse_number("-2^-1", "x") == -0.5);
  CHECK_THROWS_AS((void)parse_number("two", "x"), ConfigError);
  CHECK_THROWS_AS((void)parse_text("no equals sign\n"), ConfigError);

  auto over = kv;
  over.set("dt=0.5");
  CHECK(over.get_double("dt", 0.0) == 0.5);
  CHECK_THROWS_AS(over.set("novalue"), ConfigError);

  const auto again = parse_text(kv.dump());
  CHECK(again.values() == kv.values());

  CHECK_NOTHROW(kv.require_known({"problem", "dt", "alphas", "warm_start"}, {"problem."}));
  try {
    kv.require_known({"problem", "dt", "alphas"}, {"problem."});
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("warm_start") != std::string::npos);
  }
}

TEST_CASE("run and sweep config mapping") {
  const auto kv = parse_text(
      "epsilon = 0.01\nalpha = 0.3\nparticles = 500\ndt = 2^-6\nhorizon = 8\n"
      "burn_in = T/4\nseed = 99\ninitial = point:1,2\n");
  const auto rc = run_config_from(kv);
  CHECK(rc.epsilon == 0.01);
  CHECK(rc.alpha == 0.3);
  CHECK(rc.num_particles == 500);
  CHECK(rc.dt == 0.015625);
  CHECK(rc.horizon == 8.0);
  CHECK(rc.burn_in == 2.0);
  CHECK(rc.seed == 99);
  REQUIRE(std::holds_alternative<engine::PointMass>(rc.initial_measure));
  CHECK(std::get<engine::PointMass>(rc.initial_measure).x0 == std::vector<double>{1.0, 2.0});
  CHECK(describe(rc.initial_measure) == "point:1,2");

  CHECK(parse_burn_in("T/8", 512.0) == 64.0);
  CHECK(parse_burn_in("3.5", 512.0) == 3.5);
  CHECK_THROWS_AS((void)parse_burn_in("T/0", 8.0), ConfigError);

  const SweepConfig d;
  REQUIRE(d.alphas.size() == 32);
  for (std::size_t j = 0; j < 32; ++j) {
    CHECK(d.alphas[j] == doctest::Approx(-0.1 + 1.2 * static_cast<double>(j) / 31.0).epsilon(1e-14));
  }
  CHECK(d.epsilons == std::vector<double>{0.1, 0.01, 0.001});

  auto warm = d;
  warm.warm_start = true;
  warm.epsilons = {0.01, 0.1};
  CHECK_THROWS_AS(warm.validate(), ConfigError);
  warm.epsilons = {0.1, 0.01};
  CHECK_NOTHROW(warm.validate());
  CHECK(warm.burn_in_for_stage(0) == 0.0);
  CHECK(warm.burn_in_for_stage(1) == warm.run.horizon / 8.0);

  auto empty = d;
  empty.alphas.clear();
  CHECK_THROWS_AS(empty.validate(), ConfigError);
  auto unsorted = d;
  unsorted.alphas = {0.5, 0.1};
  CHECK_THROWS_AS(unsorted.validate(), ConfigError);

  const auto skv = parse_text("problem = E4\nepsilons = 0.1, 0.01\nalpha.count = 5\nwarm_start = yes\n");
  const auto sc = sweep_config_from(skv);
  CHECK(sc.problem.name == "E4");
  CHECK(sc.alphas.size() == 5);
  CHECK(sc.alphas.front() == doctest::Approx(-0.1));
  CHECK(sc.alphas.back() == doctest::Approx(1.1));
  CHECK(sc.warm_start);
  CHECK_THROWS_AS(parse_text("epsilonz = 0.1\n").require_known(sweep_keys(), {"problem."}), ConfigError);
  CHECK_THROWS_AS((void)sweep_config_from(parse_text("problem = E9\n")).problem.make(), ConfigError);
}

TEST_CASE("summary and metadata round trips") {
  ipm_test::TempDir dir("out");
  SummaryRow a;
  a.epsilon = 0.1;
  a.alpha = 1.0 / 3.0;
  a.lambda_hat = -0.1234567890123456789;
  a.num_particles = 1000;
  a.dt = 0.0078125;
  a.horizon = 512.0;
  a.seed = 18446744073709551615ULL;
  SummaryRow b = a;
  b.standard_error = 0.004;
  b.n_replicates = 5;
  write_summary_csv(dir / "s.csv", {a, b});
  const auto back = read_summary_csv(dir / "s.csv");
  REQUIRE(back.size() == 2);
  CHECK(slurp(dir / "s.csv").rfind(std::string(kSummaryHeader) + "\n", 0) == 0);
  CHECK(back[0].alpha == a.alpha);
  CHECK(back[0].lambda_hat == a.lambda_hat);
  CHECK(back[0].seed == a.seed);
  CHECK_FALSE(back[0].standard_error.has_value());
  CHECK(back[1].standard_error == 0.004);
  CHECK(back[1].n_replicates == 5);

  RunMetadata m;
  m.problem = "E2";
  m.problem_options = {{"a", "1"}};
  m.config.epsilon = 0.1 / 3.0;
  m.config.alpha = 0.7;
  m.config.burn_in = 1.5;
  m.config.initial_measure = engine::PointMass{{0.1, -0.2}};
  m.replicate = 2;
  m.burn_in_policy = "warm";
  m.provenance = {ChainLink{0.1, "x/final_ensemble.csv", "abc"}};
  m.input_hash = "abc";
  m.final_ensemble_hash = "def";
  m.lambda_hat = std::nan("");
  write_run_metadata(dir / "m.json", m);
  const auto r = read_run_metadata(dir / "m.json");
  CHECK(r.problem == "E2");
  CHECK(r.problem_options == m.problem_options);
  CHECK(r.config.epsilon == m.config.epsilon);
  CHECK(r.config.burn_in == 1.5);
  CHECK(describe(r.config.initial_measure) == describe(m.config.initial_measure));
  CHECK(r.replicate == 2);
  REQUIRE(r.provenance.size() == 1);
  CHECK(r.provenance[0].hash == "abc");
  CHECK(r.input_hash == m.input_hash);
  CHECK(std::isnan(r.lambda_hat));
}

TEST_CASE("sweep layout, determinism and workers") {
  ipm_test::TempDir dir("sweep");
  auto c = tiny_sweep(dir / "a");
  const auto first = run_sweep(c);
  CHECK(exit_code(first) == 0);
  REQUIRE(first.rows.size() == c.epsilons.size() * c.alphas.size());
  CHECK(first.rows[0].epsilon == 0.1);
  CHECK(first.rows[1].alpha == 0.25);
  CHECK(std::filesystem::exists(dir / "a/summary.csv"));
  CHECK(std::filesystem::exists(dir / "a/curve_e0.csv"));
  CHECK(std::filesystem::exists(dir / "a/rate_e1.csv"));
  CHECK(std::filesystem::exists(dir / "a/reference.csv"));
  CHECK(std::filesystem::exists(dir / "a/runs/e1_a02_r0/metadata.json"));

  c.output_dir = dir / "b";
  (void)run_sweep(c);
  CHECK(slurp(dir / "a/summary.csv") == slurp(dir / "b/summary.csv"));

  c.output_dir = dir / "c";
  c.workers = 3;
  (void)run_sweep(c);
  CHECK(slurp(dir / "a/summary.csv") == slurp(dir / "c/summary.csv"));
}

TEST_CASE("warm start chains ensembles across epsilon") {
  ipm_test::TempDir dir("warm");
  auto c = tiny_sweep(dir / "w");
  c.warm_start = true;
  const auto res = run_sweep(c);
  REQUIRE(exit_code(res) == 0);
  const auto upstream = dir / "w/runs/e0_a01_r0/final_ensemble.csv";
  const auto m = read_run_metadata(dir / "w/runs/e1_a01_r0/metadata.json");
  CHECK(m.burn_in_policy == "warm");
  CHECK(m.config.burn_in == c.run.horizon / 8.0);
  REQUIRE(m.provenance.size() == 1);
  CHECK(m.provenance[0].epsilon == 0.1);
  CHECK(m.input_hash == engine::file_hash(upstream));
  CHECK(m.provenance[0].hash == engine::file_hash(upstream));
  const auto cold = read_run_metadata(dir / "w/runs/e0_a01_r0/metadata.json");
  CHECK(cold.burn_in_policy == "cold");
  CHECK(cold.provenance.empty());
}

TEST_CASE("failed runs are isolated") {
  ipm_test::TempDir dir("fail");
  SweepConfig c;
  c.problem.name = "LE2";
  c.alphas = {-25.0, 0.5};
  c.epsilons = {0.1};
  c.run.num_particles = 100;
  c.run.dt = 1.0;
  c.run.horizon = 256.0;
  c.output_dir = dir / "f";
  const auto res = run_sweep(c);
  CHECK(exit_code(res) == 3);
  REQUIRE(res.failures.size() == 1);
  CHECK(res.failures[0].alpha == -25.0);
  CHECK(res.rows.size() == 1);
  CHECK(res.rows[0].alpha == 0.5);
  CHECK(std::filesystem::exists(dir / "f/failures.csv"));
  const auto m = read_run_metadata(dir / "f/runs/e0_a00_r0/metadata.json");
  CHECK(m.status == "failed");
  CHECK_FALSE(m.error.empty());
}

TEST_CASE("replicates and log-log fit") {
  CHECK(replicate_seed(5, 0) == 5);
  CHECK(replicate_seed(5, 1) != 5);
  CHECK(replicate_seed(5, 1) != replicate_seed(5, 2));

  engine::RunConfig rc;
  const auto one = summarize(rc, 3, {1.0});
  CHECK_FALSE(one.standard_error.has_value());
  const auto many = summarize(rc, 3, {1.0, 2.0, 3.0});
  CHECK(many.lambda_hat == 2.0);
  CHECK(*many.standard_error == doctest::Approx(1.0 / std::sqrt(3.0)));

  const std::vector<double> x = {16, 32, 64, 128};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -1.0));
  const auto fit = fit_log_log(x, y);
  CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.halfwidth == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));

  ConvergenceConfig cc;
  cc.grid = {16, 32};
  CHECK_THROWS_AS((void)convergence_harness(cc), ConfigError);
  cc.grid = {16, 32, 32};
  CHECK_THROWS_AS((void)convergence_harness(cc), ConfigError);

  ProblemSelection le2{"LE2", {}};
  ProblemSelection le2a{"LE2", {{"a", "3"}}};
  CHECK(exact_eigenvalue(le2, 0.3) == doctest::Approx(exact_eigenvalue(le2a, 0.3)).epsilon(1e-12));
  CHECK(exact_eigenvalue(ProblemSelection{"LE1", {}}, 0.5) == doctest::Approx(1.0 - std::sqrt(2.0)));
  CHECK_THROWS_AS((void)exact_eigenvalue(ProblemSelection{"E4", {}}, 0.5), ConfigError);
}

}  // TEST_SUITE
