#pragma once

#include <cstddef>
#include <vector>

#include "hetjsq/model.hpp"

namespace hetjsq {

/// Delay-optimal class bias for the hybrid scheme (class chosen with
/// probability p_j, then SQ(2) between two servers of that class).
struct HybridSolution {
  std::size_t active_set_size = 0;
  double theta_star = 0.0;  // multiplier of the work-conservation constraint
  std::vector<double> loads;
  std::vector<double> probabilities;
  double mean_sojourn = 0.0;
};

/// sum_{k>=1} (2^k - 1) rho^(2^k - 2): the marginal cost of load on an SQ(2)
/// subsystem. Throws DomainError unless 0 <= rho < 1.
double phi_inverse(double rho);

/// Inverse of phi_inverse, extended by 0 on [0, 1].
double phi(double x);

/// mu sum_{i<=j} gamma_i C_i phi(theta C_i); `j` is a 0-based class index.
double psi_inverse(std::size_t j, double theta, const SystemConfig& config);

/// The theta with psi_inverse(j, theta) = lambda. Throws Unreachable when
/// lambda >= mu sum_{i<=j} gamma_i C_i.
double psi(std::size_t j, double lambda, const SystemConfig& config);

/// Homogeneous SQ(2) tails rho^(2^k - 1), truncated at `truncation`.
TailVector hybrid_tails(double rho, std::size_t truncation = kDefaultTruncation);

/// sum_{k>=1} rho^(2^k - 1).
double sq2_mean_occupancy(double rho);

/// (1/lambda) sum_j gamma_j sum_{k>=1} rho_j^(2^k - 1).
double hybrid_mean_sojourn(const SystemConfig& config,
                           const std::vector<double>& loads);

/// Throws Unstable when lambda is at or above the static limit and
/// InvalidArgument when lambda is not positive.
HybridSolution solve_hybrid(const SystemConfig& config);

/// Bias p_i = gamma_i C_i / sum_j gamma_j C_j. Every class then runs at the
/// same load lambda / (mu sum_j gamma_j C_j).
std::vector<double> proportional_bias(const SystemConfig& config);

/// Hybrid solution for an arbitrary bias vector (loads, sojourn); throws
/// Unstable if some class would be loaded at or above 1.
HybridSolution evaluate_hybrid_bias(const SystemConfig& config,
                                    const std::vector<double>& probabilities);

}  // namespace hetjsq
