#pragma once

#include <cstdint>

#include "ipm/engine/rng.hpp"
#include "ipm/model/problem.hpp"

namespace ipm::reference {

struct EntropyProductionEstimate {
  double rate = 0.0;      // mean over paths of S_t / t
  double standard_error = 0.0;  // across paths
  int num_paths = 0;
};

/// Simulates dX = (-grad V + b) dt + sqrt(2 eps) dW by Euler-Maruyama from a
/// standard Gaussian start and accumulates the Stratonovich entropy production
///   S = (1 / eps) sum <b((X_n + X_{n+1}) / 2), X_{n+1} - X_n>
/// by the midpoint rule. Noise of step n comes from StreamKey{seed, n}.
[[nodiscard]] EntropyProductionEstimate direct_entropy_production(const model::ProblemSpec& problem,
                                                                  double epsilon, double dt,
                                                                  double horizon, int num_paths,
                                                                  std::uint64_t seed);

}  // namespace ipm::reference
