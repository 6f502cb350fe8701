#pragma once

#include <cstddef>
#include <vector>

#include "hetjsq/model.hpp"

namespace hetjsq {

/// Delay-optimal state-independent routing. Classes 0..active_set_size-1
/// carry load; the rest receive no traffic.
struct StaticRoutingSolution {
  std::size_t active_set_size = 0;
  std::vector<double> loads;          // rho_j, per-server utilization
  std::vector<double> probabilities;  // p_j, share of arrivals sent to class j
  double mean_sojourn = 0.0;
};

/// Mean sojourn (1/lambda) sum_j gamma_j rho_j / (1 - rho_j) of independent
/// processor-sharing servers run at the given loads.
double static_mean_sojourn(const SystemConfig& config,
                           const std::vector<double>& loads);

/// Converts per-class loads to routing probabilities p_j = rho_j gamma_j mu C_j / lambda.
std::vector<double> loads_to_probabilities(const SystemConfig& config,
                                           const std::vector<double>& loads);

/// Closed-form optimum of min sum_j gamma_j rho_j / (1 - rho_j) subject to
/// sum_j gamma_j C_j rho_j = lambda / mu. Expects classes sorted by descending
/// capacity (as produced by validate_config). Throws Unstable when lambda is
/// at or above the static limit and InvalidArgument when lambda is not positive.
StaticRoutingSolution solve_static(const SystemConfig& config);

}  // namespace hetjsq
