#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hetjsq/model.hpp"

namespace hetjsq {

enum class SchemeKind {
  Static,  // class by p, then a uniform server of that class
  SqD,     // least occupied of d distinct uniformly sampled servers
  Hybrid,  // class by p, then SQ(2) between two servers of that class
};

struct Scheme {
  SchemeKind kind = SchemeKind::SqD;
  std::vector<double> probabilities;  // Static and Hybrid only
  std::size_t d = 2;                  // SqD only

  static Scheme static_routing(std::vector<double> p) {
    return {SchemeKind::Static, std::move(p), 1};
  }
  static Scheme sq_d(std::size_t d) { return {SchemeKind::SqD, {}, d}; }
  static Scheme hybrid(std::vector<double> p) {
    return {SchemeKind::Hybrid, std::move(p), 2};
  }

  std::string name() const;
};

enum class JobSizeKind { Exponential, Deterministic, PowerLaw };

/// Job-size laws with mean 1 / mu. The power law has survival function
/// 1 / (4 (mu x)^2) on x >= 1 / (2 mu); its variance is infinite.
struct JobSizeDistribution {
  JobSizeKind kind = JobSizeKind::Exponential;
  double mu = 1.0;

  double mean() const { return 1.0 / mu; }
  const char* name() const;
};

/// Inverse CDF of the power law for u in [0, 1).
double power_law_quantile(double u, double mu);

double sample_job_size(const JobSizeDistribution& dist, std::mt19937_64& rng);

struct SimConfig {
  SystemConfig system;
  std::size_t n_servers = 200;
  Scheme scheme;
  JobSizeDistribution job_size;
  std::uint64_t horizon = 2'000'000;     // arrivals per replication
  std::optional<std::uint64_t> warmup;   // defaults to 20% of horizon
  std::size_t replications = 10;
  std::uint64_t seed = 1;
  std::size_t tail_levels = 32;          // empirical tails kept up to this level
  std::size_t threads = 0;               // 0: one per hardware thread

  std::uint64_t warmup_jobs() const { return warmup.value_or(horizon / 5); }
};

/// Throws ConfigError when the configuration cannot be simulated.
void validate(const SimConfig& config);

/// Time-stationary occupancy tails estimated from snapshots taken at arrival
/// epochs (Poisson arrivals see time averages).
class TailAccumulator {
 public:
  TailAccumulator(std::vector<std::size_t> class_sizes, std::size_t levels);

  /// `at_least[j][k]` is the number of class-j servers holding >= k jobs.
  void observe(const std::vector<std::vector<std::uint32_t>>& at_least);

  std::uint64_t samples() const noexcept { return samples_; }

  /// Throws NoSamples before the first observation.
  TailFamily tails() const;

 private:
  std::vector<std::size_t> class_sizes_;
  std::size_t levels_;
  std::vector<std::vector<std::uint64_t>> sums_;
  std::uint64_t samples_ = 0;
};

struct ReplicationResult {
  double mean_sojourn = 0.0;
  std::uint64_t measured_jobs = 0;
  TailFamily empirical_tails;
  std::vector<double> join_frequencies;  // share of measured jobs per class
  std::uint64_t events = 0;
  std::uint64_t zero_size_jobs = 0;
  std::uint64_t clamped_departures = 0;  // departure delays rounded up to 0
  double work_arrived = 0.0;
  double work_departed = 0.0;
  double service_delivered = 0.0;        // sum over servers of C * busy time
  double mean_occupancy = 0.0;           // per server, over the measurement window
  double arrival_rate = 0.0;             // per server, over the measurement window
  double end_time = 0.0;

  /// Mean sojourn implied by Little's law over the measurement window.
  double little_sojourn() const { return mean_occupancy / arrival_rate; }
};

struct SimResult {
  double mean_sojourn = 0.0;
  double ci_half_width = 0.0;  // 95% Student-t across replications
  TailFamily empirical_tails;  // replication average
  std::vector<double> join_frequencies;
  std::uint64_t events = 0;
  std::uint64_t zero_size_jobs = 0;
  std::uint64_t clamped_departures = 0;
  std::vector<ReplicationResult> replications;
};

/// One replication. Arrivals stop after `horizon` jobs and the farm drains,
/// so every measured job (index >= warmup) completes.
ReplicationResult run_replication(const SimConfig& config, std::size_t index);

/// All replications (concurrently when threads allow), then aggregated.
SimResult run(const SimConfig& config);

/// Half-width of the 95% Student-t interval for the mean of `values`.
double confidence_half_width(const std::vector<double>& values);

}  // namespace hetjsq
