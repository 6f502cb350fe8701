#include "hetjsq/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hetjsq/error.hpp"
#include "hetjsq/stability.hpp"

namespace hetjsq {

const char* to_string(EquilibriumMethod method) noexcept {
  switch (method) {
    case EquilibriumMethod::Auto: return "auto";
    case EquilibriumMethod::ShootingM2: return "shooting_m2";
    case EquilibriumMethod::OdeRelaxation: return "ode_relaxation";
  }
  return "unknown";
}

namespace {

void drift_into(const LevelArray& u, const SystemConfig& config,
                std::vector<double>& mix, LevelArray& h) {
  const std::size_t m = u.classes();
  const std::size_t levels = u.levels();
  const double lambda = config.arrival_rate;

  // mix[n] = sum_i gamma_i u_n^(i), with mix[levels] = 0 past the boundary.
  mix.assign(levels + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double g = config.fraction(i);
    for (std::size_t n = 0; n < levels; ++n) mix[n] += g * u(i, n);
  }

  for (std::size_t j = 0; j < m; ++j) {
    const double service = config.mu * config.capacity(j);
    h(j, 0) = 0.0;
    for (std::size_t n = 1; n < levels; ++n) {
      const double above = n + 1 < levels ? u(j, n + 1) : 0.0;
      h(j, n) = lambda * (u(j, n - 1) - u(j, n)) * (mix[n - 1] + mix[n]) -
                service * (u(j, n) - above);
    }
  }
}

double cone_violation(const LevelArray& u) {
  double worst = 0.0;
  for (std::size_t j = 0; j < u.classes(); ++j) {
    for (std::size_t n = 1; n < u.levels(); ++n) {
      worst = std::max(worst, -u(j, n));
      worst = std::max(worst, u(j, n) - u(j, n - 1));
    }
  }
  return worst;
}

// Projects each row back to 1 = u_0 >= u_1 >= ... >= 0, returning the total
// absolute correction.
double clamp_to_cone(LevelArray& u) {
  double mass = 0.0;
  for (std::size_t j = 0; j < u.classes(); ++j) {
    u(j, 0) = 1.0;
    for (std::size_t n = 1; n < u.levels(); ++n) {
      double v = std::clamp(u(j, n), 0.0, u(j, n - 1));
      if (v < 1e-300) v = 0.0;
      mass += std::abs(v - u(j, n));
      u(j, n) = v;
    }
  }
  return mass;
}

double default_max_step(const SystemConfig& config) {
  double cmax = 0.0;
  for (const auto& c : config.classes) cmax = std::max(cmax, c.capacity);
  const double lipschitz = 8.0 * config.arrival_rate + 2.0 * config.mu * cmax;
  return 2.0 / lipschitz;
}

}  // namespace

LevelArray drift(const LevelArray& u, const SystemConfig& config) {
  LevelArray h(u.classes(), u.levels());
  std::vector<double> mix;
  drift_into(u, config, mix, h);
  return h;
}

LevelArray drift(const MeanFieldState& state, const SystemConfig& config) {
  return drift(state.tails.array(), config);
}

double weighted_sup_norm(const LevelArray& u) {
  double norm = 0.0;
  for (std::size_t j = 0; j < u.classes(); ++j) {
    for (std::size_t n = 0; n < u.levels(); ++n) {
      norm = std::max(norm, std::abs(u(j, n)) / static_cast<double>(n + 1));
    }
  }
  return norm;
}

Trajectory integrate(const MeanFieldState& initial, const SystemConfig& config,
                     const IntegrateOptions& options) {
  if (initial.tails.classes() != config.class_count()) {
    fail(ErrorKind::InvalidArgument, "state and config disagree on class count");
  }
  const double max_step =
      options.max_step > 0.0 ? options.max_step : default_max_step(config);
  const double min_step = max_step * 1e-9;

  Trajectory traj;
  traj.states.push_back(initial);

  LevelArray u = initial.tails.array();
  const std::size_t m = u.classes();
  const std::size_t levels = u.levels();
  LevelArray k1(m, levels), k2(m, levels), k3(m, levels), k4(m, levels);
  LevelArray trial(m, levels);
  std::vector<double> mix;

  auto axpy = [](const LevelArray& base, double a, const LevelArray& dir,
                 LevelArray& out) {
    auto b = base.flat();
    auto d = dir.flat();
    auto o = out.flat();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = b[i] + a * d[i];
  };

  double t = initial.time;
  const double t_end = initial.time + options.horizon;
  double next_record =
      options.record_every > 0.0 ? t + options.record_every : t_end + 1.0;
  double step = max_step;
  bool converged = false;

  drift_into(u, config, mix, k1);
  while (true) {
    traj.final_drift = k1.max_abs();
    if (options.until_equilibrium && traj.final_drift < options.drift_tolerance) {
      converged = true;
      break;
    }
    if (t >= t_end) break;

    double dt = std::min(step, t_end - t);
    while (true) {
      axpy(u, 0.5 * dt, k1, trial);
      drift_into(trial, config, mix, k2);
      axpy(u, 0.5 * dt, k2, trial);
      drift_into(trial, config, mix, k3);
      axpy(u, dt, k3, trial);
      drift_into(trial, config, mix, k4);
      auto o = trial.flat();
      auto b = u.flat();
      auto a1 = k1.flat(), a2 = k2.flat(), a3 = k3.flat(), a4 = k4.flat();
      for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = b[i] + dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
      }
      if (cone_violation(trial) > 1e-9 && dt > min_step) {
        dt *= 0.5;
        step = dt;
        ++traj.rejected_steps;
        continue;
      }
      break;
    }
    traj.clamp_mass += clamp_to_cone(trial);
    std::swap(u, trial);
    t += dt;
    ++traj.steps;
    step = std::min(max_step, step * 2.0);

    if (t >= next_record && t < t_end) {
      traj.states.push_back({TailFamily(u), t});
      next_record += options.record_every;
    }
    drift_into(u, config, mix, k1);
  }

  traj.final_weighted_drift = weighted_sup_norm(k1);
  traj.states.push_back({TailFamily(u), t});

  if (options.until_equilibrium) {
    if (!converged) {
      std::ostringstream os;
      os << "drift " << traj.final_drift << " after horizon " << options.horizon;
      fail(ErrorKind::NoConvergence, os.str());
    }
    if (!traj.final_state().tails.within_tolerance()) {
      fail(ErrorKind::NoConvergence,
           "limit point carries tail mass at the truncation level");
    }
  }
  return traj;
}

std::vector<double> next_tail_levels(const TailFamily& tails,
                                     const SystemConfig& config,
                                     std::size_t k) {
  const std::size_t m = tails.classes();
  const std::size_t last = tails.truncation();
  if (k > last) fail(ErrorKind::DomainError, "level beyond truncation");
  auto at = [&](std::size_t j, std::size_t l) {
    return l <= last ? tails(j, l) : 0.0;
  };

  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    double inner = config.fraction(j) * at(j, k) * at(j, k);
    for (std::size_t i = 0; i < m; ++i) {
      if (i == j) continue;
      inner += at(j, k) * config.fraction(i) * at(i, k);
      double cross = 0.0;
      for (std::size_t l = k; l < last; ++l) {
        cross += at(i, l + 1) * at(j, l) - at(i, l) * at(j, l + 1);
      }
      inner += config.fraction(i) * cross;
    }
    out[j] = config.offered_load(j) * inner;
  }
  return out;
}

double consistency_residual(const TailFamily& tails,
                            const SystemConfig& config) {
  const std::size_t m = tails.classes();
  const std::size_t last = tails.truncation();
  double worst = 0.0;
  for (std::size_t k = 0; k <= last; ++k) {
    double lhs = 0.0;
    double mix = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double above = k + 1 <= last ? tails(j, k + 1) : 0.0;
      lhs += config.fraction(j) / config.offered_load(j) * above;
      mix += config.fraction(j) * tails(j, k);
    }
    worst = std::max(worst, std::abs(lhs - mix * mix));
  }
  return worst;
}

double recursion_residual(const TailFamily& tails, const SystemConfig& config) {
  double worst = 0.0;
  for (std::size_t k = 0; k < tails.truncation(); ++k) {
    const auto next = next_tail_levels(tails, config, k);
    for (std::size_t j = 0; j < next.size(); ++j) {
      worst = std::max(worst, std::abs(next[j] - tails(j, k + 1)));
    }
  }
  return worst;
}

double state_dependent_rate(const TailFamily& tails, const SystemConfig& config,
                            std::size_t k) {
  if (k >= tails.truncation()) {
    fail(ErrorKind::DomainError, "state_dependent_rate needs k below the truncation");
  }
  double mix = 0.0;
  for (std::size_t i = 0; i < tails.classes(); ++i) {
    mix += config.fraction(i) * (tails(i, k) + tails(i, k + 1));
  }
  return config.arrival_rate * mix;
}

SojournEstimate mean_sojourn_from_tails(const TailFamily& tails,
                                        const SystemConfig& config) {
  if (!(config.arrival_rate > 0.0)) {
    fail(ErrorKind::InvalidArgument, "mean sojourn needs a positive arrival rate");
  }
  SojournEstimate est;
  const std::size_t last = tails.truncation();
  for (std::size_t j = 0; j < tails.classes(); ++j) {
    double occupancy = 0.0;
    for (std::size_t k = 1; k <= last; ++k) occupancy += tails(j, k);
    est.mean += config.fraction(j) * occupancy;
    est.truncation_bound +=
        config.fraction(j) * static_cast<double>(last) * tails(j, last);
  }
  est.mean /= config.arrival_rate;
  est.truncation_bound /= config.arrival_rate;
  return est;
}

double class_join_probability(const TailFamily& tails,
                              const SystemConfig& config, std::size_t j) {
  return config.fraction(j) * tails(j, 1) / config.offered_load(j);
}

std::vector<double> class_join_probabilities(const TailFamily& tails,
                                             const SystemConfig& config) {
  std::vector<double> out(tails.classes());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = class_join_probability(tails, config, j);
  }
  return out;
}

namespace {

struct ShotOutcome {
  LevelArray values;
  int failing_class = -1;    // -1 when no violation occurred
  std::size_t last_valid = 0;  // highest level with both sequences valid
};

// Runs the two-class level recursion
//   P_{l+2} = P_{l+1} - nu_j (P_l - P_{l+1}) sum_i gamma_i (P_l^(i) + P_{l+1}^(i))
// from P_1^(1) = alpha, with P_1^(2) fixed by sum_j (gamma_j/nu_j) P_1^(j) = 1.
ShotOutcome shoot(double alpha, const SystemConfig& config, std::size_t levels) {
  const double g1 = config.fraction(0), g2 = config.fraction(1);
  const double nu1 = config.offered_load(0), nu2 = config.offered_load(1);

  ShotOutcome out{LevelArray(2, levels, 0.0), -1, 1};
  auto& p = out.values;
  p(0, 0) = p(1, 0) = 1.0;
  p(0, 1) = alpha;
  p(1, 1) = nu2 / g2 * (1.0 - g1 / nu1 * alpha);
  const double nu[2] = {nu1, nu2};

  for (std::size_t l = 0; l + 2 < levels; ++l) {
    const double mix = g1 * (p(0, l) + p(0, l + 1)) + g2 * (p(1, l) + p(1, l + 1));
    double next[2];
    for (std::size_t j = 0; j < 2; ++j) {
      next[j] = p(j, l + 1) - nu[j] * (p(j, l) - p(j, l + 1)) * mix;
    }
    // Sequences that fail to stay monotone and nonnegative; when both fail
    // at once the one further outside its bounds decides.
    double badness[2];
    for (std::size_t j = 0; j < 2; ++j) {
      badness[j] = std::max(-next[j], next[j] - p(j, l + 1));
    }
    if (badness[0] > 0.0 || badness[1] > 0.0) {
      out.failing_class = badness[0] >= badness[1] ? 0 : 1;
      return out;
    }
    p(0, l + 2) = next[0];
    p(1, l + 2) = next[1];
    out.last_valid = l + 2;
    if (next[0] == 0.0 && next[1] == 0.0) return out;
  }
  return out;
}

void fill_residuals(EquilibriumResult& r, const SystemConfig& config) {
  r.residual = drift(r.tails.array(), config).max_abs();
  r.identity_residual = consistency_residual(r.tails, config);
  r.recursion_residual = recursion_residual(r.tails, config);
}

std::optional<EquilibriumResult> solve_by_shooting(const SystemConfig& config,
                                                   std::size_t levels) {
  const double g1 = config.fraction(0), g2 = config.fraction(1);
  const double nu1 = config.offered_load(0), nu2 = config.offered_load(1);
  double lo = std::max(0.0, nu1 / g1 * (1.0 - g2 / nu2));
  double hi = std::min(1.0, nu1 / g1);
  if (!(lo < hi)) {
    fail(ErrorKind::ShootingBracketEmpty, "alpha bracket is empty");
  }

  const int fail_lo = shoot(lo, config, levels).failing_class;
  const int fail_hi = shoot(hi, config, levels).failing_class;
  if (fail_lo < 0 || fail_hi < 0 || fail_lo == fail_hi) return std::nullopt;

  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const int f = shoot(mid, config, levels).failing_class;
    if (f < 0) {
      lo = hi = mid;
      break;
    }
    (f == fail_lo ? lo : hi) = mid;
  }
  const double alpha = 0.5 * (lo + hi);
  ShotOutcome shot = shoot(alpha, config, levels);

  // Keep the valid prefix, cut after the first level where both sequences
  // have dropped below 1e-13, and zero the rest.
  std::size_t keep = shot.last_valid;
  for (std::size_t l = 1; l <= shot.last_valid; ++l) {
    if (shot.values(0, l) < 1e-13 && shot.values(1, l) < 1e-13) {
      keep = l;
      break;
    }
  }
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t l = keep + 1; l < levels; ++l) shot.values(j, l) = 0.0;
  }

  EquilibriumResult r;
  r.tails = TailFamily(std::move(shot.values));
  r.method = EquilibriumMethod::ShootingM2;
  r.alpha = alpha;
  fill_residuals(r, config);
  if (!r.certified()) return std::nullopt;
  return r;
}

EquilibriumResult solve_by_relaxation(const SystemConfig& config,
                                      const EquilibriumOptions& options) {
  IntegrateOptions io;
  io.horizon = options.horizon;
  io.until_equilibrium = true;
  io.drift_tolerance = options.relaxation_tolerance;
  MeanFieldState start{TailFamily::empty(config.class_count(), options.truncation), 0.0};
  auto traj = integrate(start, config, io);

  EquilibriumResult r;
  r.tails = traj.final_state().tails;
  r.method = EquilibriumMethod::OdeRelaxation;
  fill_residuals(r, config);
  return r;
}

}  // namespace

EquilibriumResult fixed_point(const SystemConfig& config,
                              const EquilibriumOptions& options) {
  if (options.truncation < 2) {
    fail(ErrorKind::InvalidArgument, "truncation must be at least 2");
  }
  if (!(config.arrival_rate > 0.0)) {
    fail(ErrorKind::InvalidArgument, "equilibrium needs a positive arrival rate");
  }
  if (!check_subset_condition(config)) {
    std::ostringstream os;
    os << "lambda = " << config.arrival_rate
       << " violates the SQ(2) subset condition";
    fail(ErrorKind::UnstableRegime, os.str());
  }

  const std::size_t levels = options.truncation + 1;
  EquilibriumMethod method = options.method;
  if (method == EquilibriumMethod::Auto) {
    method = config.class_count() == 2 ? EquilibriumMethod::ShootingM2
                                        : EquilibriumMethod::OdeRelaxation;
  }
  if (method == EquilibriumMethod::ShootingM2) {
    if (config.class_count() != 2) {
      fail(ErrorKind::InvalidArgument, "shooting is defined for two classes only");
    }
    if (auto shot = solve_by_shooting(config, levels)) return *shot;
    auto r = solve_by_relaxation(config, options);
    r.shooting_fell_back = true;
    return r;
  }
  return solve_by_relaxation(config, options);
}

}  // namespace hetjsq
