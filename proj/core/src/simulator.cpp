#include "hetjsq/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "hetjsq/error.hpp"
#include "hetjsq/stability.hpp"

namespace hetjsq {

std::string Scheme::name() const {
  switch (kind) {
    case SchemeKind::Static: return "static";
    case SchemeKind::SqD: return d == 2 ? "sq2" : "sq" + std::to_string(d);
    case SchemeKind::Hybrid: return "hybrid";
  }
  return "unknown";
}

const char* JobSizeDistribution::name() const {
  switch (kind) {
    case JobSizeKind::Exponential: return "exp";
    case JobSizeKind::Deterministic: return "const";
    case JobSizeKind::PowerLaw: return "powerlaw";
  }
  return "unknown";
}

double power_law_quantile(double u, double mu) {
  return 1.0 / (2.0 * mu * std::sqrt(1.0 - u));
}

double sample_job_size(const JobSizeDistribution& dist, std::mt19937_64& rng) {
  switch (dist.kind) {
    case JobSizeKind::Exponential:
      return std::exponential_distribution<double>(dist.mu)(rng);
    case JobSizeKind::Deterministic:
      return 1.0 / dist.mu;
    case JobSizeKind::PowerLaw:
      return power_law_quantile(std::uniform_real_distribution<double>(0.0, 1.0)(rng),
                                dist.mu);
  }
  return 0.0;
}

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  fail(ErrorKind::ConfigError, msg);
}

void check_probabilities(const SimConfig& config) {
  const auto& p = config.scheme.probabilities;
  if (p.size() != config.system.class_count()) {
    config_error("routing probabilities need one entry per class");
  }
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) config_error("routing probabilities must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) config_error("routing probabilities must sum to 1");
}

}  // namespace

void validate(const SimConfig& config) {
  if (config.system.class_count() == 0) config_error("no server classes");
  if (!(config.system.arrival_rate > 0.0)) config_error("arrival rate must be positive");
  if (!(config.job_size.mu > 0.0)) config_error("job-size rate must be positive");
  if (config.n_servers < 1) config_error("need at least one server");
  if (config.replications < 1) config_error("need at least one replication");
  if (config.horizon < 1) config_error("horizon must be positive");
  if (config.warmup_jobs() > config.horizon) config_error("warmup exceeds horizon");

  std::vector<std::size_t> sizes;
  try {
    sizes = class_sizes(config.system, config.n_servers);
  } catch (const Error& e) {
    config_error(e.what());
  }

  switch (config.scheme.kind) {
    case SchemeKind::SqD:
      if (config.scheme.d < 1 || config.scheme.d > config.n_servers) {
        std::ostringstream os;
        os << "sq_d needs 1 <= d <= N, got d = " << config.scheme.d
           << " with N = " << config.n_servers;
        config_error(os.str());
      }
      break;
    case SchemeKind::Static:
      check_probabilities(config);
      break;
    case SchemeKind::Hybrid:
      check_probabilities(config);
      for (std::size_t j = 0; j < sizes.size(); ++j) {
        if (config.scheme.probabilities[j] > 0.0 && sizes[j] < 2) {
          config_error("hybrid routing needs two servers in every class it uses");
        }
      }
      break;
  }
}

TailAccumulator::TailAccumulator(std::vector<std::size_t> class_sizes,
                                 std::size_t levels)
    : class_sizes_(std::move(class_sizes)),
      levels_(levels),
      sums_(class_sizes_.size(), std::vector<std::uint64_t>(levels + 1, 0)) {}

void TailAccumulator::observe(
    const std::vector<std::vector<std::uint32_t>>& at_least) {
  for (std::size_t j = 0; j < sums_.size(); ++j) {
    auto& sum = sums_[j];
    const auto& row = at_least[j];
    for (std::size_t k = 0; k <= levels_; ++k) {
      if (row[k] == 0) break;
      sum[k] += row[k];
    }
  }
  ++samples_;
}

TailFamily TailAccumulator::tails() const {
  if (samples_ == 0) fail(ErrorKind::NoSamples, "no arrivals were observed");
  LevelArray values(sums_.size(), levels_ + 1);
  for (std::size_t j = 0; j < sums_.size(); ++j) {
    const double denom =
        static_cast<double>(samples_) * static_cast<double>(class_sizes_[j]);
    for (std::size_t k = 0; k <= levels_; ++k) {
      values(j, k) = static_cast<double>(sums_[j][k]) / denom;
    }
    values(j, 0) = 1.0;
  }
  return TailFamily(std::move(values));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Min-heap over server indices keyed by next departure time. Every server
// has exactly one slot, so rescheduling never leaves stale entries.
class DepartureHeap {
 public:
  explicit DepartureHeap(std::size_t n) : key_(n, kInf), heap_(n), pos_(n) {
    std::iota(heap_.begin(), heap_.end(), std::size_t{0});
    std::iota(pos_.begin(), pos_.end(), std::size_t{0});
  }

  std::size_t top() const { return heap_[0]; }
  double top_key() const { return key_[heap_[0]]; }

  void update(std::size_t s, double key) {
    const double old = key_[s];
    key_[s] = key;
    if (key < old) {
      sift_up(pos_[s]);
    } else if (key > old) {
      sift_down(pos_[s]);
    }
  }

 private:
  void swap_at(std::size_t a, std::size_t b) {
    std::swap(heap_[a], heap_[b]);
    pos_[heap_[a]] = a;
    pos_[heap_[b]] = b;
  }
  void sift_up(std::size_t i) {
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!(key_[heap_[i]] < key_[heap_[parent]])) break;
      swap_at(i, parent);
      i = parent;
    }
  }
  void sift_down(std::size_t i) {
    const std::size_t n = heap_.size();
    for (;;) {
      std::size_t best = i;
      const std::size_t l = 2 * i + 1;
      const std::size_t r = l + 1;
      if (l < n && key_[heap_[l]] < key_[heap_[best]]) best = l;
      if (r < n && key_[heap_[r]] < key_[heap_[best]]) best = r;
      if (best == i) break;
      swap_at(i, best);
      i = best;
    }
  }

  std::vector<double> key_;
  std::vector<std::size_t> heap_;
  std::vector<std::size_t> pos_;
};

struct Job {
  double tag;      // virtual finish time on its server
  double arrival;
  double size;
  bool measured;
};

struct JobLater {
  bool operator()(const Job& a, const Job& b) const { return a.tag > b.tag; }
};

// Processor sharing in virtual time: V advances at C / n while n jobs are
// present, and a job of size x that arrives at V = v leaves when V = v + x.
struct Server {
  double capacity = 1.0;
  double virtual_time = 0.0;
  double last_update = 0.0;
  double busy_time = 0.0;
  std::size_t cls = 0;
  std::vector<Job> jobs;  // min-heap on tag

  std::size_t occupancy() const { return jobs.size(); }
};

std::mt19937_64 make_stream(std::uint64_t seed, std::size_t replication,
                            std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

std::size_t uniform_index(std::size_t n, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

class Replication {
 public:
  Replication(const SimConfig& config, std::size_t index)
      : config_(config),
        sizes_(class_sizes(config.system, config.n_servers)),
        block_start_(sizes_.size(), 0),
        servers_(config.n_servers),
        departures_(config.n_servers),
        at_least_(sizes_.size()),
        tails_(sizes_, config.tail_levels),
        joins_(sizes_.size(), 0),
        arrivals_rng_(make_stream(config.seed, index, 0)),
        sizes_rng_(make_stream(config.seed, index, 1)),
        routing_rng_(make_stream(config.seed, index, 2)) {
    std::size_t s = 0;
    for (std::size_t j = 0; j < sizes_.size(); ++j) {
      block_start_[j] = s;
      at_least_[j].assign(config.tail_levels + 1, 0);
      at_least_[j][0] = static_cast<std::uint32_t>(sizes_[j]);
      for (std::size_t r = 0; r < sizes_[j]; ++r, ++s) {
        servers_[s].capacity = config.system.capacity(j);
        servers_[s].cls = j;
      }
    }
    if (config.scheme.kind == SchemeKind::SqD) {
      permutation_.resize(config.n_servers);
      std::iota(permutation_.begin(), permutation_.end(), std::size_t{0});
    }
    if (config.scheme.kind != SchemeKind::SqD) {
      cumulative_.resize(sizes_.size());
      std::partial_sum(config.scheme.probabilities.begin(),
                       config.scheme.probabilities.end(), cumulative_.begin());
    }
  }

  ReplicationResult run() {
    const std::uint64_t horizon = config_.horizon;
    const std::uint64_t warmup = config_.warmup_jobs();
    const double farm_rate =
        config_.system.arrival_rate * static_cast<double>(config_.n_servers);
    std::exponential_distribution<double> gap(farm_rate);

    double now = 0.0;
    double next_arrival = gap(arrivals_rng_);
    std::uint64_t arrivals = 0;
    double window_start = 0.0;
    double window_end = 0.0;
    double area = 0.0;  // integral of farm occupancy over the window

    ReplicationResult out;
    double sojourn_sum = 0.0;

    for (;;) {
      const double next_departure = departures_.top_key();
      const bool arrival_next = arrivals < horizon && next_arrival <= next_departure;
      if (!arrival_next && next_departure == kInf) break;
      const double t = arrival_next ? next_arrival : next_departure;
      if (arrivals > warmup && arrivals < horizon) {
        area += static_cast<double>(in_system_) * (t - now);
      }
      now = t;
      ++out.events;

      if (arrival_next) {
        const bool measured = arrivals >= warmup;
        if (arrivals == warmup) window_start = now;
        if (measured) tails_.observe(at_least_);
        ++arrivals;
        if (arrivals == horizon) window_end = now;

        const double size = sample_job_size(config_.job_size, sizes_rng_);
        out.work_arrived += size;
        const std::size_t s = route();
        if (measured) ++joins_[servers_[s].cls];
        if (size <= 0.0) {
          ++out.zero_size_jobs;
          if (measured) ++out.measured_jobs;
        } else {
          admit(s, Job{0.0, now, size, measured});
        }
        next_arrival = now + gap(arrivals_rng_);
      } else {
        const std::size_t s = departures_.top();
        Job job = release(s, out);
        out.work_departed += job.size;
        if (job.measured) {
          sojourn_sum += now - job.arrival;
          ++out.measured_jobs;
        }
      }
    }

    for (const auto& server : servers_) {
      out.service_delivered += server.capacity * server.busy_time;
    }
    out.end_time = now;
    out.empirical_tails = tails_.tails();
    if (out.measured_jobs == 0) fail(ErrorKind::NoSamples, "no measured jobs");
    out.mean_sojourn = sojourn_sum / static_cast<double>(out.measured_jobs);

    const double total_joins = static_cast<double>(
        std::accumulate(joins_.begin(), joins_.end(), std::uint64_t{0}));
    out.join_frequencies.resize(joins_.size());
    for (std::size_t j = 0; j < joins_.size(); ++j) {
      out.join_frequencies[j] = static_cast<double>(joins_[j]) / total_joins;
    }

    const double window = window_end - window_start;
    const double nd = static_cast<double>(config_.n_servers);
    if (window > 0.0) {
      out.mean_occupancy = area / (window * nd);
      out.arrival_rate = static_cast<double>(horizon - warmup - 1) / (window * nd);
    }
    return out;
  }

 private:
  void advance(Server& server, double t) {
    const std::size_t n = server.occupancy();
    if (n > 0) {
      const double dt = t - server.last_update;
      server.virtual_time += dt * server.capacity / static_cast<double>(n);
      server.busy_time += dt;
    }
    server.last_update = t;
  }

  void reschedule(std::size_t s) {
    Server& server = servers_[s];
    if (server.jobs.empty()) {
      departures_.update(s, kInf);
      return;
    }
    double remaining = server.jobs.front().tag - server.virtual_time;
    if (remaining < 0.0) {
      remaining = 0.0;
      ++clamped_;
    }
    departures_.update(s, server.last_update + remaining *
                                                   static_cast<double>(server.occupancy()) /
                                                   server.capacity);
  }

  void admit(std::size_t s, Job job) {
    Server& server = servers_[s];
    advance(server, job.arrival);
    job.tag = server.virtual_time + job.size;
    server.jobs.push_back(job);
    std::push_heap(server.jobs.begin(), server.jobs.end(), JobLater{});
    const std::size_t n = server.occupancy();
    if (n <= config_.tail_levels) ++at_least_[server.cls][n];
    ++in_system_;
    reschedule(s);
  }

  Job release(std::size_t s, ReplicationResult& out) {
    Server& server = servers_[s];
    advance(server, departures_.top_key());
    const std::size_t n = server.occupancy();
    if (n <= config_.tail_levels) --at_least_[server.cls][n];
    std::pop_heap(server.jobs.begin(), server.jobs.end(), JobLater{});
    Job job = server.jobs.back();
    server.jobs.pop_back();
    if (server.jobs.empty()) server.virtual_time = 0.0;
    --in_system_;
    const std::uint64_t before = clamped_;
    reschedule(s);
    out.clamped_departures += clamped_ - before;
    return job;
  }

  std::size_t pick_class() {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(routing_rng_);
    for (std::size_t j = 0; j + 1 < cumulative_.size(); ++j) {
      if (u < cumulative_[j] && config_.scheme.probabilities[j] > 0.0) return j;
    }
    // Round-off in the cumulative sum lands on the last class with p > 0.
    for (std::size_t j = cumulative_.size(); j-- > 0;) {
      if (config_.scheme.probabilities[j] > 0.0) return j;
    }
    return 0;
  }

  std::size_t route() {
    switch (config_.scheme.kind) {
      case SchemeKind::Static: {
        const std::size_t j = pick_class();
        return block_start_[j] + uniform_index(sizes_[j], routing_rng_);
      }
      case SchemeKind::Hybrid: {
        const std::size_t j = pick_class();
        const std::size_t a = uniform_index(sizes_[j], routing_rng_);
        std::size_t b = uniform_index(sizes_[j] - 1, routing_rng_);
        if (b >= a) ++b;
        const std::size_t sa = block_start_[j] + a;
        const std::size_t sb = block_start_[j] + b;
        const std::size_t na = servers_[sa].occupancy();
        const std::size_t nb = servers_[sb].occupancy();
        if (na != nb) return na < nb ? sa : sb;
        return std::bernoulli_distribution(0.5)(routing_rng_) ? sa : sb;
      }
      case SchemeKind::SqD: {
        // Partial Fisher-Yates draws d distinct servers; ties are broken
        // uniformly by reservoir sampling.
        const std::size_t n = permutation_.size();
        std::size_t best = 0;
        std::size_t best_occupancy = std::numeric_limits<std::size_t>::max();
        std::size_t ties = 0;
        for (std::size_t i = 0; i < config_.scheme.d; ++i) {
          const std::size_t r = i + uniform_index(n - i, routing_rng_);
          std::swap(permutation_[i], permutation_[r]);
          const std::size_t s = permutation_[i];
          const std::size_t occ = servers_[s].occupancy();
          if (occ < best_occupancy) {
            best = s;
            best_occupancy = occ;
            ties = 1;
          } else if (occ == best_occupancy) {
            ++ties;
            if (uniform_index(ties, routing_rng_) == 0) best = s;
          }
        }
        return best;
      }
    }
    return 0;
  }

  const SimConfig& config_;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> block_start_;
  std::vector<Server> servers_;
  DepartureHeap departures_;
  std::vector<std::vector<std::uint32_t>> at_least_;
  TailAccumulator tails_;
  std::vector<std::uint64_t> joins_;
  std::vector<double> cumulative_;
  std::vector<std::size_t> permutation_;
  std::uint64_t in_system_ = 0;
  std::uint64_t clamped_ = 0;
  std::mt19937_64 arrivals_rng_;
  std::mt19937_64 sizes_rng_;
  std::mt19937_64 routing_rng_;
};

}  // namespace

ReplicationResult run_replication(const SimConfig& config, std::size_t index) {
  validate(config);
  return Replication(config, index).run();
}

double confidence_half_width(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  return t * sd / std::sqrt(static_cast<double>(n));
}

SimResult run(const SimConfig& config) {
  validate(config);
  const std::size_t reps = config.replications;
  std::vector<ReplicationResult> results(reps);

  std::size_t threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, reps);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < reps; i = next++) {
      try {
        results[i] = Replication(config, i).run();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SimResult out;
  std::vector<double> means;
  const std::size_t m = config.system.class_count();
  LevelArray tails(m, config.tail_levels + 1, 0.0);
  out.join_frequencies.assign(m, 0.0);
  for (const auto& r : results) {
    means.push_back(r.mean_sojourn);
    out.events += r.events;
    out.zero_size_jobs += r.zero_size_jobs;
    out.clamped_departures += r.clamped_departures;
    for (std::size_t j = 0; j < m; ++j) {
      out.join_frequencies[j] += r.join_frequencies[j] / static_cast<double>(reps);
      for (std::size_t k = 0; k <= config.tail_levels; ++k) {
        tails(j, k) += r.empirical_tails(j, k) / static_cast<double>(reps);
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) tails(j, 0) = 1.0;
  // Averaging monotone rows keeps them monotone up to round-off.
  out.empirical_tails = TailFamily(std::move(tails), 1e-12);
  out.mean_sojourn = std::accumulate(means.begin(), means.end(), 0.0) /
                     static_cast<double>(reps);
  out.ci_half_width = reps >= 2 ? confidence_half_width(means) : 0.0;
  out.replications = std::move(results);
  return out;
}

}  // namespace hetjsq
