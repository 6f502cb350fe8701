#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hetjsq/model.hpp"

namespace hetjsq {

// Thresholds an equilibrium must meet to be reported as certified.
inline constexpr double kDriftCertification = 1e-10;
inline constexpr double kIdentityCertification = 1e-10;
inline constexpr double kRecursionCertification = 1e-9;

/// Occupancy tails u_n^(j)(t) of the large-farm limit under uniform SQ(2).
struct MeanFieldState {
  TailFamily tails;
  double time = 0.0;
};

/// Right-hand side of the mean-field ODE,
///   h_n^(j) = lambda (u_{n-1}^(j) - u_n^(j)) sum_i gamma_i (u_{n-1}^(i) + u_n^(i))
///             - mu C_j (u_n^(j) - u_{n+1}^(j)),
/// with h_0 = 0 and u_{K+1} = 0 at the truncation boundary.
LevelArray drift(const LevelArray& u, const SystemConfig& config);
LevelArray drift(const MeanFieldState& state, const SystemConfig& config);

/// sup_j sup_n |u_n^(j)| / (n + 1).
double weighted_sup_norm(const LevelArray& u);

struct IntegrateOptions {
  double horizon = 1e6;
  /// Stop as soon as the sup norm of the drift falls below drift_tolerance.
  bool until_equilibrium = true;
  double drift_tolerance = 1e-11;
  /// Spacing of recorded states; 0 keeps only the initial and final state.
  double record_every = 0.0;
  /// Largest RK4 step; 0 derives it from the drift's Lipschitz constant.
  double max_step = 0.0;
};

struct Trajectory {
  std::vector<MeanFieldState> states;  // initial state first, final state last
  double final_drift = 0.0;            // sup norm
  double final_weighted_drift = 0.0;   // weighted sup norm
  double clamp_mass = 0.0;             // total correction applied by clamping
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;

  const MeanFieldState& final_state() const { return states.back(); }
};

/// Explicit RK4 with step halving whenever a trial step would leave the
/// monotone cone by more than 1e-9; accepted steps are clamped back onto it.
/// In until-equilibrium mode throws NoConvergence when the horizon is reached
/// first, or when the limit point carries tail mass at the truncation level
/// (the signature of an unstable regime on a truncated lattice).
Trajectory integrate(const MeanFieldState& initial, const SystemConfig& config,
                     const IntegrateOptions& options = {});

enum class EquilibriumMethod { Auto, ShootingM2, OdeRelaxation };

struct EquilibriumOptions {
  EquilibriumMethod method = EquilibriumMethod::Auto;
  std::size_t truncation = kDefaultTruncation;
  double relaxation_tolerance = 1e-12;
  double horizon = 1e6;
};

struct EquilibriumResult {
  TailFamily tails;
  EquilibriumMethod method = EquilibriumMethod::OdeRelaxation;
  double residual = 0.0;            // max |h(P)|
  double identity_residual = 0.0;   // see consistency_residual
  double recursion_residual = 0.0;  // max |next_tail_levels - stored P_{k+1}|
  std::optional<double> alpha;      // shooting parameter P_1^(1)
  bool shooting_fell_back = false;

  bool certified() const {
    return residual <= kDriftCertification &&
           identity_residual <= kIdentityCertification &&
           recursion_residual <= kRecursionCertification;
  }
};

/// Equilibrium of the mean-field ODE. Auto uses alpha-shooting for two
/// classes (falling back to relaxation if shooting cannot be certified) and
/// relaxation from the empty state otherwise. Throws UnstableRegime when the
/// subset condition fails.
EquilibriumResult fixed_point(const SystemConfig& config,
                              const EquilibriumOptions& options = {});

/// Right-hand side of the level recursion for P_{k+1}^(j), one value per class,
/// including the cross-class correction sum truncated at the last level.
std::vector<double> next_tail_levels(const TailFamily& tails,
                                     const SystemConfig& config, std::size_t k);

/// max_k | sum_j (gamma_j / nu_j) P_{k+1}^(j) - (sum_j gamma_j P_k^(j))^2 |.
double consistency_residual(const TailFamily& tails, const SystemConfig& config);

/// max_k max_j | next_tail_levels(k)_j - P_{k+1}^(j) |.
double recursion_residual(const TailFamily& tails, const SystemConfig& config);

/// Arrival intensity seen by a tagged server holding k jobs:
/// lambda sum_i gamma_i (P_k^(i) + P_{k+1}^(i)). Requires k < K.
double state_dependent_rate(const TailFamily& tails, const SystemConfig& config,
                            std::size_t k);

struct SojournEstimate {
  double mean = 0.0;
  /// (1/lambda) sum_j gamma_j K P_K^(j): a safety margin for the dropped tail.
  double truncation_bound = 0.0;
};

/// (1/lambda) sum_j sum_{k>=1} gamma_j P_k^(j).
SojournEstimate mean_sojourn_from_tails(const TailFamily& tails,
                                        const SystemConfig& config);

/// Long-run share of arrivals joining class j: gamma_j P_1^(j) / nu_j.
double class_join_probability(const TailFamily& tails,
                              const SystemConfig& config, std::size_t j);
std::vector<double> class_join_probabilities(const TailFamily& tails,
                                             const SystemConfig& config);

const char* to_string(EquilibriumMethod method) noexcept;

}  // namespace hetjsq
