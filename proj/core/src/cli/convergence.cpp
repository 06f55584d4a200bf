#include "ipm/cli/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "ipm/engine/ipm.hpp"
#include "ipm/error.hpp"
#include "ipm/reference/limits.hpp"

namespace ipm::cli {
namespace {

/// Runs every (point, replicate) pair; results[i] for task i.
std::vector<double> run_all(const model::ProblemSpec& problem, const std::vector<engine::RunConfig>& configs,
                            int workers, const Logger& log) {
  std::vector<double> out(configs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto body = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i] = engine::run_ipm(problem, configs[i]).lambda_hat;
        if (log) {
          char buf[160];
          std::snprintf(buf, sizeof buf, "T=%g dt=%g seed=%llu lambda=%.10g", configs[i].horizon, configs[i].dt,
                        static_cast<unsigned long long>(configs[i].seed), out[i]);
          std::lock_guard lock(mu);
          log(buf);
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = configs.size();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), configs.size());
  if (n <= 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace

const char* to_string(Axis axis) noexcept { return axis == Axis::horizon ? "T" : "dt"; }

Axis parse_axis(const std::string& text) {
  if (text == "T" || text == "horizon") return Axis::horizon;
  if (text == "dt" || text == "step") return Axis::step;
  throw ConfigError("axis must be T or dt, got '" + text + "'");
}

LogLogFit fit_log_log(std::span<const double> values, std::span<const double> errors) {
  if (values.size() != errors.size()) throw ConfigError("fit_log_log: size mismatch");
  const std::size_t n = values.size();
  if (n < 3) throw ConfigError("a slope fit needs at least 3 grid points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] > 0.0) || !(errors[i] > 0.0)) throw DomainError("log-log fit needs positive values and errors");
    mx += std::log(values[i]);
    my += std::log(errors[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(values[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(errors[i]) - my);
  }
  if (!(sxx > 0.0)) throw DomainError("log-log fit needs distinct grid values");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::log(errors[i]) - fit.intercept - fit.slope * std::log(values[i]);
    rss += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  const boost::math::students_t t(dof);
  fit.halfwidth = boost::math::quantile(t, 0.975) * std::sqrt(rss / dof / sxx);
  return fit;
}

double exact_eigenvalue(const ProblemSelection& problem, double alpha) {
  if (problem.name == "LE1") return reference::limit_eigenvalue_E1(alpha);
  if (problem.name == "LE2") return reference::exact_eigenvalue_LE2(alpha);
  throw ConfigError("problem " + problem.name + " has no exact eigenvalue; use LE1 or LE2");
}

ConvergenceReport convergence_harness(const ConvergenceConfig& config, const Logger& log) {
  if (config.grid.size() < 3) throw ConfigError("convergence grid needs at least 3 points");
  if (config.replicates < 1) throw ConfigError("replicates must be at least 1");
  ConvergenceReport report;
  report.axis = config.axis;
  report.problem = config.problem.name;
  report.exact = exact_eigenvalue(config.problem, config.fixed.alpha);
  const auto problem = config.problem.make();

  std::vector<double> grid = config.grid;
  std::sort(grid.begin(), grid.end());
  if (std::adjacent_find(grid.begin(), grid.end()) != grid.end()) throw ConfigError("convergence grid has duplicates");

  std::vector<engine::RunConfig> configs;
  for (double value : grid) {
    engine::RunConfig c = config.fixed;
    (config.axis == Axis::horizon ? c.horizon : c.dt) = value;
    c.burn_in = parse_burn_in(config.burn_in, c.horizon);
    c.validate();
    for (int r = 0; r < config.replicates; ++r) {
      c.seed = replicate_seed(config.fixed.seed, r);
      configs.push_back(c);
    }
  }
  const auto lambdas = run_all(*problem, configs, config.workers, log);

  const auto reps = static_cast<std::size_t>(config.replicates);
  std::vector<double> errors;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    ConvergencePoint point;
    point.value = grid[p];
    point.lambdas.assign(lambdas.begin() + static_cast<std::ptrdiff_t>(p * reps),
                         lambdas.begin() + static_cast<std::ptrdiff_t>((p + 1) * reps));
    double sum = 0.0, sum_sq = 0.0, lsum = 0.0;
    for (double l : point.lambdas) {
      const double e = std::abs(l - report.exact);
      sum += e;
      sum_sq += e * e;
      lsum += l;
    }
    const double n = static_cast<double>(reps);
    point.mean_error = sum / n;
    point.mean_lambda = lsum / n;
    point.error_stderr = reps > 1 ? std::sqrt(std::max(0.0, sum_sq - sum * sum / n) / (n - 1.0) / n) : 0.0;
    errors.push_back(point.mean_error);
    report.points.push_back(std::move(point));
  }
  report.fit = fit_log_log(grid, errors);
  return report;
}

void write_convergence_csv(const std::filesystem::path& path, const ConvergenceReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "value,mean_abs_error,error_stderr,mean_lambda,replicates\n";
  char buf[160];
  for (const auto& p : report.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%zu\n", p.value, p.mean_error, p.error_stderr,
                  p.mean_lambda, p.lambdas.size());
    out << buf;
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_convergence_json(const std::filesystem::path& path, const ConvergenceReport& report) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : report.points) {
    points.push_back({{"value", p.value},
                      {"mean_abs_error", p.mean_error},
                      {"error_stderr", p.error_stderr},
                      {"lambdas", p.lambdas}});
  }
  const nlohmann::json j = {{"problem", report.problem},
                            {"axis", to_string(report.axis)},
                            {"exact", report.exact},
                            {"slope", report.fit.slope},
                            {"slope_ci95_halfwidth", report.fit.halfwidth},
                            {"intercept", report.fit.intercept},
                            {"points", points}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

BurnInComparison burn_in_ab(const ProblemSelection& selection, const engine::RunConfig& fixed,
                            const std::string& burn_in, int replicates, int workers) {
  if (replicates < 1) throw ConfigError("replicates must be at least 1");
  const double exact = exact_eigenvalue(selection, fixed.alpha);
  const auto problem = selection.make();
  std::vector<engine::RunConfig> configs;
  for (int r = 0; r < replicates; ++r) {
    engine::RunConfig c = fixed;
    c.seed = replicate_seed(fixed.seed, r);
    c.burn_in = 0.0;
    c.validate();
    configs.push_back(c);
    c.burn_in = parse_burn_in(burn_in, c.horizon);
    c.validate();
    configs.push_back(c);
  }
  const auto lambdas = run_all(*problem, configs, workers, {});
  BurnInComparison cmp;
  for (int r = 0; r < replicates; ++r) {
    const double without = std::abs(lambdas[2 * static_cast<std::size_t>(r)] - exact);
    const double with = std::abs(lambdas[2 * static_cast<std::size_t>(r) + 1] - exact);
    cmp.error_without.push_back(without);
    cmp.error_with.push_back(with);
    if (with <= without) ++cmp.wins;
  }
  return cmp;
}

}  // namespace ipm::cli
