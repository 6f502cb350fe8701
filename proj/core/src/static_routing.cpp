#include "hetjsq/static_routing.hpp"

#include <cmath>
#include <sstream>

#include "hetjsq/error.hpp"
#include "hetjsq/stability.hpp"

namespace hetjsq {

double static_mean_sojourn(const SystemConfig& config,
                           const std::vector<double>& loads) {
  double occupancy = 0.0;
  for (std::size_t j = 0; j < loads.size(); ++j) {
    occupancy += config.fraction(j) * loads[j] / (1.0 - loads[j]);
  }
  return occupancy / config.arrival_rate;
}

std::vector<double> loads_to_probabilities(const SystemConfig& config,
                                           const std::vector<double>& loads) {
  std::vector<double> p(loads.size());
  for (std::size_t j = 0; j < loads.size(); ++j) {
    p[j] = loads[j] * config.fraction(j) * config.mu * config.capacity(j) /
           config.arrival_rate;
  }
  return p;
}

StaticRoutingSolution solve_static(const SystemConfig& config) {
  const double lambda = config.arrival_rate;
  if (!(lambda > 0.0)) fail(ErrorKind::InvalidArgument, "lambda must be positive");
  const double limit = static_limit(config);
  if (lambda >= limit) {
    std::ostringstream os;
    os << "lambda = " << lambda << " is not below the static limit " << limit;
    fail(ErrorKind::Unstable, os.str());
  }

  const std::size_t m = config.class_count();
  const double demand = lambda / config.mu;

  // Largest prefix j for which class j still belongs to the active set. A
  // nonpositive slack means the prefix cannot carry the load alone, so the
  // class is needed.
  std::size_t active = 0;
  double work = 0.0;
  double root_work = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    work += config.fraction(j) * config.capacity(j);
    root_work += config.fraction(j) * std::sqrt(config.capacity(j));
    const double slack = work - demand;
    if (slack <= 0.0 || 1.0 / std::sqrt(config.capacity(j)) < root_work / slack) {
      active = j + 1;
    }
  }

  double active_work = 0.0;
  double active_root = 0.0;
  for (std::size_t j = 0; j < active; ++j) {
    active_work += config.fraction(j) * config.capacity(j);
    active_root += config.fraction(j) * std::sqrt(config.capacity(j));
  }
  const double scale = (active_work - demand) / active_root;

  StaticRoutingSolution sol;
  sol.active_set_size = active;
  sol.loads.assign(m, 0.0);
  for (std::size_t j = 0; j < active; ++j) {
    sol.loads[j] = 1.0 - scale / std::sqrt(config.capacity(j));
  }
  sol.probabilities = loads_to_probabilities(config, sol.loads);
  sol.mean_sojourn = static_mean_sojourn(config, sol.loads);
  return sol;
}

}  // namespace hetjsq
