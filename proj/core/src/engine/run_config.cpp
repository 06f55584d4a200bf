#include "ipm/engine/run_config.hpp"

#include <cmath>
#include <string>

#include "ipm/error.hpp"

namespace ipm::engine {

std::uint64_t step_count(double t, double dt, const char* what) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive and finite");
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError(std::string(what) + " must be finite and >= 0");
  const double ratio = t / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
    throw ConfigError(std::string(what) + " / dt = " + std::to_string(ratio) + " is not an integer");
  }
  return static_cast<std::uint64_t>(n);
}

void RunConfig::validate() const {
  weight_params().validate();
  if (num_particles < 1) throw ConfigError("num_particles must be >= 1");
  if (num_particles > 0xFFFFFFFFull) throw ConfigError("num_particles must fit in 32 bits");
  const std::uint64_t n = step_count(horizon, dt, "horizon");
  if (n == 0) throw ConfigError("horizon must be positive");
  if (step_count(burn_in, dt, "burn_in") >= n) throw ConfigError("burn_in must be < horizon");
  if (const auto* p = std::get_if<PointMass>(&initial_measure)) {
    for (double v : p->x0)
      if (!std::isfinite(v)) throw ConfigError("point-mass location must be finite");
  }
}

std::uint64_t RunConfig::num_steps() const { return step_count(horizon, dt, "horizon"); }

std::uint64_t RunConfig::burn_in_steps() const { return step_count(burn_in, dt, "burn_in"); }

}  // namespace ipm::engine
