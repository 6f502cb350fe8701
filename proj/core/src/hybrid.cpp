#include "hetjsq/hybrid.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hetjsq/error.hpp"
#include "hetjsq/stability.hpp"
#include "hetjsq/static_routing.hpp"

namespace hetjsq {

double phi_inverse(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    std::ostringstream os;
    os << "phi_inverse needs 0 <= rho < 1, got " << rho;
    fail(ErrorKind::DomainError, os.str());
  }
  // Term k is (2^k - 1) rho^(2^k - 2); rho^(2^(k+1) - 2) = (rho^(2^k - 2))^2 rho^2.
  double sum = 0.0;
  double power = 1.0;  // rho^(2^k - 2) for k = 1
  double weight = 1.0; // 2^k - 1
  for (int k = 1; k < 64; ++k) {
    const double term = weight * power;
    sum += term;
    if (term < 1e-16 * sum) break;
    power = power * power * rho * rho;
    weight = 2.0 * weight + 1.0;
  }
  return sum;
}

double phi(double x) {
  if (!(x > 1.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (phi_inverse(mid) < x ? lo : hi) = mid;
  }
  return lo;
}

double psi_inverse(std::size_t j, double theta, const SystemConfig& config) {
  double sum = 0.0;
  for (std::size_t i = 0; i <= j; ++i) {
    sum += config.fraction(i) * config.capacity(i) * phi(theta * config.capacity(i));
  }
  return config.mu * sum;
}

double psi(std::size_t j, double lambda, const SystemConfig& config) {
  double reach = 0.0;
  for (std::size_t i = 0; i <= j; ++i) reach += config.fraction(i) * config.capacity(i);
  reach *= config.mu;
  if (!(lambda < reach)) {
    std::ostringstream os;
    os << "lambda = " << lambda << " is not below " << reach
       << ", the capacity of the first " << j + 1 << " classes";
    fail(ErrorKind::Unreachable, os.str());
  }
  double lo = 1.0 / config.capacity(0);
  if (lambda <= 0.0) return lo;
  double hi = 2.0 * lo;
  while (psi_inverse(j, hi, config) < lambda) hi *= 2.0;
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (psi_inverse(j, mid, config) < lambda ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TailVector hybrid_tails(double rho, std::size_t truncation) {
  if (!(rho >= 0.0 && rho < 1.0)) fail(ErrorKind::DomainError, "load must lie in [0, 1)");
  std::vector<double> p(truncation + 1, 0.0);
  p[0] = 1.0;
  // rho^(2^(k+1) - 1) = (rho^(2^k - 1))^2 rho
  double value = rho;
  for (std::size_t k = 1; k <= truncation && value > 0.0; ++k) {
    p[k] = value;
    value = value * value * rho;
  }
  return TailVector(std::move(p));
}

double sq2_mean_occupancy(double rho) {
  double sum = 0.0;
  double value = rho;
  while (value > 0.0) {
    sum += value;
    if (value < 1e-17 * sum) break;
    value = value * value * rho;
  }
  return sum;
}

double hybrid_mean_sojourn(const SystemConfig& config,
                           const std::vector<double>& loads) {
  double occupancy = 0.0;
  for (std::size_t j = 0; j < loads.size(); ++j) {
    occupancy += config.fraction(j) * sq2_mean_occupancy(loads[j]);
  }
  return occupancy / config.arrival_rate;
}

HybridSolution solve_hybrid(const SystemConfig& config) {
  const double lambda = config.arrival_rate;
  if (!(lambda > 0.0)) fail(ErrorKind::InvalidArgument, "lambda must be positive");
  const double limit = static_limit(config);
  if (lambda >= limit) {
    std::ostringstream os;
    os << "lambda = " << lambda << " is not below the static limit " << limit;
    fail(ErrorKind::Unstable, os.str());
  }

  const std::size_t m = config.class_count();
  std::size_t active = 0;
  double reach = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    reach += config.mu * config.fraction(j) * config.capacity(j);
    // psi_j is undefined when the prefix cannot carry lambda; the test is
    // then false and a longer prefix decides.
    if (lambda < reach && 1.0 / config.capacity(j) < psi(j, lambda, config)) {
      active = j + 1;
    }
  }

  HybridSolution sol;
  sol.active_set_size = active;
  sol.theta_star = psi(active - 1, lambda, config);
  sol.loads.assign(m, 0.0);
  for (std::size_t j = 0; j < active; ++j) {
    sol.loads[j] = phi(sol.theta_star * config.capacity(j));
  }
  sol.probabilities = loads_to_probabilities(config, sol.loads);
  sol.mean_sojourn = hybrid_mean_sojourn(config, sol.loads);
  return sol;
}

std::vector<double> proportional_bias(const SystemConfig& config) {
  const double total = config.mean_capacity();
  std::vector<double> p(config.class_count());
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = config.fraction(j) * config.capacity(j) / total;
  }
  return p;
}

HybridSolution evaluate_hybrid_bias(const SystemConfig& config,
                                    const std::vector<double>& probabilities) {
  if (probabilities.size() != config.class_count()) {
    fail(ErrorKind::InvalidArgument, "one probability per class is required");
  }
  HybridSolution sol;
  sol.probabilities = probabilities;
  sol.loads.resize(probabilities.size());
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    const double rho = probabilities[j] * config.arrival_rate /
                       (config.fraction(j) * config.mu * config.capacity(j));
    if (!(rho < 1.0)) {
      std::ostringstream os;
      os << "class " << j + 1 << " would run at load " << rho;
      fail(ErrorKind::Unstable, os.str());
    }
    sol.loads[j] = rho;
    if (rho > 0.0) sol.active_set_size = j + 1;
  }
  sol.mean_sojourn = hybrid_mean_sojourn(config, sol.loads);
  return sol;
}

}  // namespace hetjsq
