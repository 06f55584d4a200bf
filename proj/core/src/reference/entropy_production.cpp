#include "ipm/reference/entropy_production.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "ipm/engine/run_config.hpp"
#include "ipm/error.hpp"

namespace ipm::reference {

EntropyProductionEstimate direct_entropy_production(const model::ProblemSpec& problem, double epsilon,
                                                    double dt, double horizon, int num_paths,
                                                    std::uint64_t seed) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
  if (num_paths < 1) throw ConfigError("num_paths must be >= 1");
  const std::uint64_t steps = engine::step_count(horizon, dt, "horizon");
  if (steps == 0) throw ConfigError("horizon must be positive");

  const auto d = static_cast<std::size_t>(problem.dim());
  const auto paths = static_cast<std::size_t>(num_paths);
  std::vector<double> x(paths * d), next(d), mid(d), grad(d), b(d), noise(paths * d);
  std::vector<double> work(paths, 0.0);
  engine::fill_gaussians({seed, 0}, engine::Domain::entropy, paths, problem.dim(), x);
  const double amp = std::sqrt(2.0 * epsilon * dt);

  for (std::uint64_t n = 1; n <= steps; ++n) {
    engine::fill_gaussians({seed, n}, engine::Domain::entropy, paths, problem.dim(), noise);
    for (std::size_t p = 0; p < paths; ++p) {
      std::span<double> xp(x.data() + p * d, d);
      problem.grad_potential(xp, grad);
      problem.drift(xp, b);
      for (std::size_t k = 0; k < d; ++k) {
        next[k] = xp[k] + (b[k] - grad[k]) * dt + amp * noise[p * d + k];
        mid[k] = 0.5 * (xp[k] + next[k]);
      }
      problem.drift(mid, b);
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += b[k] * (next[k] - xp[k]);
      work[p] += s;
      for (std::size_t k = 0; k < d; ++k) {
        if (!std::isfinite(next[k])) {
          throw NonFiniteError("path " + std::to_string(p) + " exploded at step " + std::to_string(n));
        }
        xp[k] = next[k];
      }
    }
  }

  const double t = static_cast<double>(steps) * dt;
  double mean = 0.0;
  for (double& w : work) {
    w /= epsilon * t;
    mean += w;
  }
  mean /= static_cast<double>(paths);
  double var = 0.0;
  for (double w : work) var += (w - mean) * (w - mean);
  EntropyProductionEstimate out;
  out.rate = mean;
  out.num_paths = num_paths;
  out.standard_error = paths > 1 ? std::sqrt(var / static_cast<double>(paths - 1) / static_cast<double>(paths)) : 0.0;
  return out;
}

}  // namespace ipm::reference
