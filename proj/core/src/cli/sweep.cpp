#include "ipm/cli/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "ipm/analysis/diagnostics.hpp"
#include "ipm/analysis/legendre.hpp"
#include "ipm/engine/histogram.hpp"
#include "ipm/engine/ipm.hpp"
#include "ipm/error.hpp"
#include "ipm/reference/limits.hpp"
#include "ipm/reference/orthogonal.hpp"

namespace ipm::cli {
namespace fs = std::filesystem;

namespace {

std::string run_name(std::size_t stage, std::size_t alpha_index, int replicate) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "e%zu_a%02zu_r%d", stage, alpha_index, replicate);
  return buf;
}

std::string stage_file(const char* stem, std::size_t stage, const char* ext) {
  return std::string(stem) + "_e" + std::to_string(stage) + ext;
}

template <class F>
void parallel_for(std::size_t count, int workers, F&& body) {
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

void write_failures(const fs::path& path, const std::vector<SweepFailure>& failures) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epsilon,alpha,replicate,error\n";
  for (const auto& f : failures) {
    std::string msg = f.error;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::replace(msg.begin(), msg.end(), ',', ';');
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,", f.epsilon, f.alpha, f.replicate);
    out << buf << msg << '\n';
  }
}

void emit(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

/// Curve-level products of one epsilon stage. Failures here are logged but
/// never fail the sweep.
void write_stage_analysis(const fs::path& out, std::size_t stage, double epsilon,
                          const std::vector<SummaryRow>& rows, const Logger& log) {
  analysis::EigenvalueCurve curve;
  curve.epsilon = epsilon;
  for (const auto& r : rows) {
    if (r.epsilon != epsilon) continue;
    curve.alphas.push_back(r.alpha);
    curve.lambdas.push_back(r.lambda_hat);
  }
  if (curve.alphas.size() < 2) return;
  try {
    analysis::write_curve_csv(out / stage_file("curve", stage, ".csv"), curve);
    const auto table = analysis::legendre_transform(curve);
    analysis::write_rate_table_csv(out / stage_file("rate", stage, ".csv"), table);
    const auto [scaled_curve, scaled_table] = analysis::rescale_for_singular_limit(curve, table);
    analysis::write_rate_table_csv(out / stage_file("rescaled_rate", stage, ".csv"), scaled_table);
    try {
      const auto curve_report = analysis::gc_symmetry_report(curve);
      std::optional<analysis::SymmetryReport> table_report;
      try {
        table_report = analysis::gc_symmetry_report(table);
      } catch (const Error&) {
      }
      analysis::write_symmetry_json(out / stage_file("symmetry", stage, ".json"), curve_report,
                                    table_report ? &*table_report : nullptr);
    } catch (const Error& e) {
      emit(log, "symmetry diagnostics skipped at stage " + std::to_string(stage) + ": " + e.what());
    }
  } catch (const Error& e) {
    emit(log, "rate-function output skipped at stage " + std::to_string(stage) + ": " + e.what());
  }
}

void write_reference(const fs::path& out, const model::ProblemSpec& problem, const model::ProblemOptions& options,
                     const std::vector<double>& alphas, const Logger& log) {
  std::vector<double> a, v;
  for (double alpha : alphas) {
    try {
      const auto ref = reference::reference_eigenvalue(problem, options, alpha);
      if (!ref) return;
      a.push_back(alpha);
      v.push_back(*ref);
    } catch (const DomainError&) {
      // outside the range where the limit formula is real
    } catch (const ConvergenceError& e) {
      emit(log, "no reference at alpha " + std::to_string(alpha) + ": " + e.what());
    }
  }
  if (a.empty()) return;
  reference::write_reference_curve_csv(out / "reference.csv", a, v);
  if (a.size() >= 2) {
    analysis::EigenvalueCurve curve{a, v, 0.0, analysis::Provenance::limit_formula};
    try {
      analysis::write_rate_table_csv(out / "reference_rate.csv", analysis::legendre_transform(curve));
    } catch (const Error& e) {
      emit(log, std::string("reference rate table skipped: ") + e.what());
    }
  }
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t seed, int replicate) {
  return replicate == 0 ? seed : engine::mix_seed(seed, static_cast<std::uint64_t>(replicate));
}

SummaryRow summarize(const engine::RunConfig& config, std::uint64_t base_seed, const std::vector<double>& lambdas) {
  SummaryRow r;
  r.epsilon = config.epsilon;
  r.alpha = config.alpha;
  r.n_replicates = static_cast<int>(lambdas.size());
  r.lambda_hat = std::accumulate(lambdas.begin(), lambdas.end(), 0.0) / static_cast<double>(lambdas.size());
  if (lambdas.size() > 1) {
    double ss = 0.0;
    for (double l : lambdas) ss += (l - r.lambda_hat) * (l - r.lambda_hat);
    const double n = static_cast<double>(lambdas.size());
    r.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  r.burn_in = config.burn_in;
  r.num_particles = config.num_particles;
  r.dt = config.dt;
  r.horizon = config.horizon;
  r.seed = base_seed;
  return r;
}

RunMetadata execute_run(const model::ProblemSpec& problem, const ProblemSelection& selection, const RunTask& task) {
  RunMetadata meta;
  meta.problem = selection.name;
  meta.problem_options = selection.options;
  meta.config = task.config;
  meta.replicate = task.replicate;
  meta.burn_in_policy = task.burn_in_policy;
  meta.provenance = task.provenance;
  meta.lambda_hat = std::nan("");
  ensure_directory(task.dir);
  try {
    if (const auto* f = std::get_if<engine::FromFile>(&task.config.initial_measure)) {
      meta.input_hash = engine::file_hash(f->path);
    }
    const fs::path final_path = task.dir / "final_ensemble.csv";
    const engine::EnsembleHeader header{selection.name, task.config.epsilon, task.config.alpha, task.config.seed};
    engine::RunObserver observer;
    observer.on_final = [&](const engine::Ensemble& e) { engine::save_ensemble(final_path, e, header); };
    const auto result = engine::run_ipm(problem, task.config, observer);
    engine::write_per_step_csv(task.dir / "per_step.csv", result.per_step, task.config.dt);
    meta.final_ensemble_hash = engine::file_hash(final_path);
    meta.lambda_hat = result.lambda_hat;
    meta.wall_seconds = result.wall_seconds;
    meta.min_ess = result.ess_trace.empty() ? 0.0 : *std::min_element(result.ess_trace.begin(), result.ess_trace.end());
  } catch (const std::exception& e) {
    meta.status = "failed";
    meta.error = e.what();
  }
  write_run_metadata(task.dir / "metadata.json", meta);
  return meta;
}

SweepResult run_sweep(const SweepConfig& config, const std::string& resolved_config, const Logger& log) {
  config.validate();
  const model::ProblemOptions options = config.problem.resolve();
  const auto problem = model::builtin_problem(config.problem.name, options);
  if (!config.histogram_alphas.empty()) {
    for (int axis : config.histogram_axes) {
      if (axis < 0 || axis >= problem->dim()) throw ConfigError("histogram.axes outside the problem dimension");
    }
  }

  const fs::path out = config.output_dir;
  ensure_directory(out);
  ensure_directory(out / "runs");
  if (!resolved_config.empty()) {
    std::ofstream f(out / "config.resolved");
    f << resolved_config;
    if (!f) throw IoError("cannot write " + (out / "config.resolved").string());
  }
  if (const auto* coupled = dynamic_cast<const model::CoupledProblem*>(problem.get())) {
    reference::write_matrix_csv(out / "orthogonal_Q.csv", coupled->orthogonal(), options.e3_seed);
  }

  const std::size_t n_alpha = config.alphas.size();
  const auto n_rep = static_cast<std::size_t>(config.replicates);
  // Last metadata of every (alpha, replicate), feeding the next stage.
  std::vector<RunMetadata> previous(n_alpha * n_rep);
  std::vector<fs::path> previous_dir(n_alpha * n_rep);

  SweepResult result;
  result.output_dir = out;
  std::mutex log_mutex;
  auto locked_log = [&](const std::string& msg) {
    std::lock_guard lock(log_mutex);
    emit(log, msg);
  };

  for (std::size_t stage = 0; stage < config.epsilons.size(); ++stage) {
    const double epsilon = config.epsilons[stage];
    const bool warm = config.warm_start && stage > 0;
    std::vector<RunMetadata> current(n_alpha * n_rep);
    std::vector<fs::path> current_dir(n_alpha * n_rep);

    parallel_for(n_alpha * n_rep, config.workers, [&](std::size_t i) {
      const std::size_t j = i / n_rep;
      const int r = static_cast<int>(i % n_rep);
      RunTask task;
      task.config = config.run;
      task.config.epsilon = epsilon;
      task.config.alpha = config.alphas[j];
      task.config.seed = replicate_seed(config.run.seed, r);
      task.config.burn_in = config.burn_in_for_stage(stage);
      task.replicate = r;
      task.dir = out / "runs" / run_name(stage, j, r);
      current_dir[i] = task.dir;
      if (warm) {
        const RunMetadata& up = previous[i];
        task.burn_in_policy = "warm";
        if (up.status != "ok") {
          RunMetadata failed;
          failed.problem = config.problem.name;
          failed.problem_options = config.problem.options;
          failed.config = task.config;
          failed.replicate = r;
          failed.burn_in_policy = "warm";
          failed.status = "failed";
          failed.error = "upstream run at epsilon " + std::to_string(config.epsilons[stage - 1]) + " failed";
          failed.lambda_hat = std::nan("");
          ensure_directory(task.dir);
          write_run_metadata(task.dir / "metadata.json", failed);
          current[i] = failed;
          return;
        }
        const fs::path input = previous_dir[i] / "final_ensemble.csv";
        task.provenance = up.provenance;
        task.provenance.push_back({up.config.epsilon, input, up.final_ensemble_hash});
        task.config.initial_measure = engine::FromFile{input};
      }
      current[i] = execute_run(*problem, config.problem, task);
      char buf[160];
      std::snprintf(buf, sizeof buf, "eps=%g alpha=%.6g rep=%d lambda=%.8g %s", epsilon, task.config.alpha, r,
                    current[i].lambda_hat, current[i].status.c_str());
      locked_log(buf);
    });

    for (std::size_t j = 0; j < n_alpha; ++j) {
      std::vector<double> lambdas;
      engine::RunConfig cfg = config.run;
      for (std::size_t r = 0; r < n_rep; ++r) {
        const RunMetadata& m = current[j * n_rep + r];
        if (m.status == "ok") {
          lambdas.push_back(m.lambda_hat);
          cfg = m.config;
        } else {
          result.failures.push_back({epsilon, config.alphas[j], static_cast<int>(r), m.error});
        }
      }
      if (lambdas.empty()) continue;
      cfg.initial_measure = engine::StandardGaussian{};
      result.rows.push_back(summarize(cfg, config.run.seed, lambdas));
    }
    write_stage_analysis(out, stage, epsilon, result.rows, log);

    for (double target : config.histogram_alphas) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < n_alpha; ++j) {
        if (std::abs(config.alphas[j] - target) < std::abs(config.alphas[best] - target)) best = j;
      }
      const RunMetadata& m = current[best * n_rep];
      if (m.status != "ok") continue;
      try {
        const auto loaded = engine::load_ensemble(current_dir[best * n_rep] / "final_ensemble.csv");
        const auto h = engine::final_density(loaded.ensemble, config.histogram_axes, config.histogram_bins);
        engine::write_histogram_csv(out / ("histogram_e" + std::to_string(stage) + "_a" +
                                           std::to_string(best) + ".csv"),
                                    h);
      } catch (const Error& e) {
        emit(log, std::string("histogram skipped: ") + e.what());
      }
    }
    previous = std::move(current);
    previous_dir = std::move(current_dir);
  }

  write_summary_csv(out / "summary.csv", result.rows);
  write_failures(out / "failures.csv", result.failures);
  write_reference(out, *problem, options, config.alphas, log);
  return result;
}

int exit_code(const SweepResult& result) { return result.failures.empty() ? 0 : 3; }

}  // namespace ipm::cli
