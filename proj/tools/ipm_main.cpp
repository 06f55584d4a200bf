#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipm/cli/convergence.hpp"
#include "ipm/cli/key_value.hpp"
#include "ipm/cli/output.hpp"
#include "ipm/cli/sweep.hpp"
#include "ipm/cli/sweep_config.hpp"
#include "ipm/engine/histogram.hpp"
#include "ipm/error.hpp"
#include "ipm/model/builtin.hpp"
#include "ipm/reference/entropy_production.hpp"
#include "ipm/reference/limits.hpp"
#include "ipm/reference/orthogonal.hpp"

namespace fs = std::filesystem;
using namespace ipm;

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kPartial = 3 };

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;
  std::string output;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", file, "key = value configuration file");
    app->add_option("-s,--set", overrides, "override, key=value (repeatable)");
    app->add_option("-o,--output", output, "output directory (overrides the output key)");
  }

  [[nodiscard]] cli::KeyValueConfig load() const {
    cli::KeyValueConfig kv = file.empty() ? cli::KeyValueConfig{} : cli::KeyValueConfig::load(file);
    for (const auto& o : overrides) kv.set(o);
    if (!output.empty()) kv.set("output", output);
    return kv;
  }
};

void log_line(const std::string& s) { std::cerr << s << std::endl; }

int cmd_run(const ConfigArgs& args) {
  const auto kv = args.load();
  kv.require_known(cli::run_keys(), {"problem."});
  const auto selection = cli::problem_from(kv);
  const auto config = cli::run_config_from(kv);
  config.validate();
  const auto problem = selection.make();
  const fs::path out = kv.get_string("output", "ipm_run");
  cli::ensure_directory(out);
  kv.write(out / "config.resolved");

  cli::RunTask task{config, 0, out, "cold", {}};
  const auto meta = cli::execute_run(*problem, selection, task);
  if (meta.status != "ok") {
    std::cerr << "run failed: " << meta.error << '\n';
    return kRuntime;
  }
  const auto row = cli::summarize(config, config.seed, {meta.lambda_hat});
  cli::write_summary_csv(out / "summary.csv", {row});
  std::cout << cli::kSummaryHeader << '\n' << cli::format_summary_row(row) << '\n';
  return kOk;
}

int cmd_sweep(const ConfigArgs& args, bool quiet) {
  const auto kv = args.load();
  kv.require_known(cli::sweep_keys(), {"problem."});
  const auto config = cli::sweep_config_from(kv);
  const auto result = cli::run_sweep(config, kv.dump(), quiet ? cli::Logger{} : cli::Logger{log_line});
  std::cerr << result.rows.size() << " summary rows, " << result.failures.size() << " failed runs in "
            << result.output_dir.string() << '\n';
  return cli::exit_code(result) == 0 ? kOk : kPartial;
}

int cmd_converge(const ConfigArgs& args, const std::string& ab, bool quiet) {
  auto kv = args.load();
  auto known = cli::run_keys();
  known.insert({"axis", "grid", "replicates", "workers"});
  kv.require_known(known, {"problem."});
  const fs::path out = kv.get_string("output", "ipm_converge");
  cli::ConvergenceConfig config;
  config.problem = cli::problem_from(kv);
  config.fixed = cli::run_config_from(kv);
  config.replicates = static_cast<int>(kv.get_int("replicates", 20));
  config.workers = static_cast<int>(kv.get_int("workers", 1));
  config.burn_in = kv.get_string("burn_in", "0");
  cli::ensure_directory(out);
  kv.write(out / "config.resolved");

  if (!ab.empty()) {
    const auto cmp = cli::burn_in_ab(config.problem, config.fixed, ab, config.replicates, config.workers);
    std::printf("replicate,error_without,error_with\n");
    for (std::size_t r = 0; r < cmp.error_with.size(); ++r) {
      std::printf("%zu,%.10g,%.10g\n", r, cmp.error_without[r], cmp.error_with[r]);
    }
    std::printf("# burn-in not worse in %d of %zu replicates (%.3f)\n", cmp.wins, cmp.error_with.size(),
                cmp.win_fraction());
    return kOk;
  }
  config.axis = cli::parse_axis(kv.get_string("axis", "T"));
  if (!kv.has("grid")) throw ConfigError("converge needs a grid, e.g. grid = 2^4,2^5,2^6");
  config.grid = kv.get_doubles("grid", {});
  const auto report = cli::convergence_harness(config, quiet ? cli::Logger{} : cli::Logger{log_line});
  cli::write_convergence_csv(out / "convergence.csv", report);
  cli::write_convergence_json(out / "convergence.json", report);
  std::printf("exact=%.12g\n%s,mean_abs_error,error_stderr\n", report.exact, cli::to_string(report.axis));
  for (const auto& p : report.points) std::printf("%.10g,%.6e,%.3e\n", p.value, p.mean_error, p.error_stderr);
  std::printf("slope=%.4f +- %.4f (95%%)\n", report.fit.slope, report.fit.halfwidth);
  return kOk;
}

int cmd_reference(const ConfigArgs& args) {
  const auto kv = args.load();
  kv.require_known({"problem", "alphas", "alpha.count", "alpha.min", "alpha.max", "output"}, {"problem."});
  const auto selection = cli::problem_from(kv);
  const auto options = selection.resolve();
  const auto problem = model::builtin_problem(selection.name, options);
  const auto alphas = kv.has("alphas") ? kv.get_doubles("alphas", {})
                                       : cli::uniform_alpha_grid(static_cast<int>(kv.get_int("alpha.count", 121)),
                                                                 kv.get_double("alpha.min", -0.1),
                                                                 kv.get_double("alpha.max", 1.1));
  const fs::path out = kv.get_string("output", "ipm_reference");
  cli::ensure_directory(out);
  std::vector<double> a, v;
  for (double alpha : alphas) {
    try {
      const auto value = reference::reference_eigenvalue(*problem, options, alpha);
      if (!value) {
        std::cerr << "problem " << selection.name << " has no reference curve\n";
        return kConfig;
      }
      a.push_back(alpha);
      v.push_back(*value);
    } catch (const DomainError& e) {
      std::cerr << "alpha=" << alpha << " skipped: " << e.what() << '\n';
    }
  }
  reference::write_reference_curve_csv(out / "reference.csv", a, v);
  if (const auto* coupled = dynamic_cast<const model::CoupledProblem*>(problem.get())) {
    reference::write_matrix_csv(out / "orthogonal_Q.csv", coupled->orthogonal(), options.e3_seed);
  }
  std::cout << "wrote " << a.size() << " points to " << (out / "reference.csv").string() << '\n';
  return kOk;
}

int cmd_density(const std::string& ensemble, const std::string& output, std::vector<int> bins, std::vector<int> axes,
                std::vector<double> range) {
  const auto loaded = engine::load_ensemble(ensemble);
  std::optional<engine::Box> box;
  if (!range.empty()) {
    if (range.size() != 4) throw ConfigError("--range takes xlo xhi ylo yhi");
    box = engine::Box{{range[0], range[2]}, {range[1], range[3]}};
  }
  if (axes.size() != 2 || bins.size() != 2) throw ConfigError("--axes and --bins take two values");
  for (int a : axes) {
    if (a < 0 || a >= loaded.ensemble.dim) throw ConfigError("--axes outside the ensemble dimension");
  }
  const auto h = engine::final_density(loaded.ensemble, {axes[0], axes[1]}, {bins[0], bins[1]}, box);
  engine::write_histogram_csv(output, h);
  return kOk;
}

int cmd_ep_direct(const ConfigArgs& args) {
  const auto kv = args.load();
  kv.require_known({"problem", "epsilon", "dt", "horizon", "paths", "seed", "output"}, {"problem."});
  const auto problem = cli::problem_from(kv).make();
  const auto est = reference::direct_entropy_production(
      *problem, kv.get_double("epsilon", 0.1), kv.get_double("dt", 0.001953125), kv.get_double("horizon", 1024.0),
      static_cast<int>(kv.get_int("paths", 64)), kv.get_u64("seed", 0));
  std::printf("rate,standard_error,paths\n%.12g,%.6g,%d\n", est.rate, est.standard_error, est.num_paths);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interacting particle method for entropy-production large deviations"};
  app.require_subcommand(1);

  ConfigArgs run_args, sweep_args, conv_args, ref_args, ep_args;
  auto* run = app.add_subcommand("run", "single IPM run; prints its summary row");
  run_args.attach(run);
  auto* sweep = app.add_subcommand("sweep", "(epsilon, alpha) sweep with optional warm start");
  sweep_args.attach(sweep);
  bool quiet = false;
  sweep->add_flag("-q,--quiet", quiet, "no per-run progress");
  auto* conv = app.add_subcommand("converge", "error against the exact eigenvalue over a T or dt grid");
  conv_args.attach(conv);
  std::string ab;
  conv->add_option("--burn-in-ab", ab, "compare burn-in 0 with this burn-in (e.g. T/2) instead of fitting");
  conv->add_flag("-q,--quiet", quiet, "no per-run progress");
  auto* ref = app.add_subcommand("reference", "vanishing-noise or exact eigenvalue curve");
  ref_args.attach(ref);
  auto* density = app.add_subcommand("density", "2-D histogram of a saved ensemble");
  std::string ensemble, hist_out = "histogram.csv";
  std::vector<int> bins{100, 100}, axes{0, 1};
  std::vector<double> range;
  density->add_option("ensemble", ensemble, "ensemble CSV")->required();
  density->add_option("-o,--output", hist_out, "histogram CSV");
  density->add_option("--bins", bins, "bins along x and y")->expected(2);
  density->add_option("--axes", axes, "coordinates to project on")->expected(2);
  density->add_option("--range", range, "xlo xhi ylo yhi")->expected(4);
  auto* ep = app.add_subcommand("ep-direct", "direct Stratonovich estimate of the mean entropy production");
  ep_args.attach(ep);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_args);
    if (*sweep) return cmd_sweep(sweep_args, quiet);
    if (*conv) return cmd_converge(conv_args, ab, quiet);
    if (*ref) return cmd_reference(ref_args);
    if (*density) return cmd_density(ensemble, hist_out, bins, axes, range);
    if (*ep) return cmd_ep_direct(ep_args);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
