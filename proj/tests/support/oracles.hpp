#pragma once

// Reference computations used only by the tests. Each one reaches its answer
// by a different route from the library so that agreement means something.

#include <cstddef>
#include <vector>

#include "hetjsq/model.hpp"

namespace hetjsq::oracle {

/// Finite-N SQ(2) limit by enumerating every server subset B with |B| >= 2.
/// Practical for n <= 20.
double finite_n_limit_subsets(const SystemConfig& config, std::size_t n);

/// Finite-N SQ(2) limit by enumerating class-count vectors (a_1..a_M).
double finite_n_limit_counts(const SystemConfig& config, std::size_t n);

/// Asymptotic SQ(2) limit by bisection on the subset condition alone.
double asymptotic_limit_by_bisection(const SystemConfig& config);

struct GridResult {
  double objective = 0.0;  // best value of the mean-occupancy objective found
  std::vector<double> loads;
  std::size_t feasible_points = 0;
};

/// Minimizes sum_j gamma_j f(rho_j) on a grid of spacing `step` in the first
/// M-1 loads; the last load is solved from sum_j gamma_j C_j rho_j = lambda/mu.
/// M must be 2 or 3.
GridResult grid_search_static(const SystemConfig& config, double step = 1e-3);
GridResult grid_search_hybrid(const SystemConfig& config, double step = 1e-3);

/// sum_j gamma_j rho_j / (1 - rho_j).
double static_objective(const SystemConfig& config, const std::vector<double>& loads);
/// sum_j gamma_j sum_{k>=1} rho_j^(2^k - 1), by repeated squaring.
double hybrid_objective(const SystemConfig& config, const std::vector<double>& loads);

/// Mean-field equilibrium by damped fixed-point iteration on the birth-death
/// form: each class is a birth-death chain with birth rates
/// lambda_k = lambda sum_i gamma_i (P_k^(i) + P_{k+1}^(i)) and death rate mu C_j.
/// Returns tails with `levels + 1` entries per class.
LevelArray birth_death_equilibrium(const SystemConfig& config, std::size_t levels = 40,
                                   double tolerance = 1e-14,
                                   std::size_t max_iterations = 200000);

/// (1/lambda) sum_j gamma_j sum_{k>=1} P_k^(j) on a raw array.
double sojourn_from_array(const SystemConfig& config, const LevelArray& tails);

/// nu^(2^k - 1) for k = 0..levels.
std::vector<double> homogeneous_sq2_tails(double nu, std::size_t levels);

}  // namespace hetjsq::oracle
