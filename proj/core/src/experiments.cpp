#include "hetjsq/experiments.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "hetjsq/config_io.hpp"
#include "hetjsq/error.hpp"
#include "hetjsq/hybrid.hpp"
#include "hetjsq/meanfield.hpp"
#include "hetjsq/stability.hpp"
#include "hetjsq/static_routing.hpp"

namespace hetjsq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SystemConfig two_class(double fast, double slow) {
  SystemConfig raw;
  raw.classes = {{fast, 0.5}, {slow, 0.5}};
  raw.mu = 1.0;
  return validate_config(raw);
}

std::vector<double> tenths() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

// "sq2" -> 2, "sq5" -> 5; 0 for anything else.
std::size_t sq_choices(const std::string& scheme) {
  if (scheme.size() < 3 || scheme.compare(0, 2, "sq") != 0) return 0;
  std::size_t d = 0;
  for (std::size_t i = 2; i < scheme.size(); ++i) {
    if (scheme[i] < '0' || scheme[i] > '9') return 0;
    d = d * 10 + static_cast<std::size_t>(scheme[i] - '0');
  }
  return d;
}

bool known_scheme(const std::string& scheme) {
  return scheme == "static" || scheme == "hybrid" || sq_choices(scheme) > 0;
}

bool is_instability(ErrorKind kind) {
  return kind == ErrorKind::Unstable || kind == ErrorKind::UnstableRegime;
}

CsvRow analytic_row(const SystemConfig& config, const std::string& scheme) {
  CsvRow row{config.arrival_rate, scheme, "meanfield", 0, "", kNaN, 0.0, "ok"};
  try {
    if (scheme == "static") {
      row.value = solve_static(config).mean_sojourn;
    } else if (scheme == "hybrid") {
      row.value = solve_hybrid(config).mean_sojourn;
    } else {
      row.value = mean_sojourn_from_tails(fixed_point(config).tails, config).mean;
    }
  } catch (const Error& e) {
    if (!is_instability(e.kind())) throw;
    row.status = "diverged";
  }
  return row;
}

CsvRow simulation_row(const ExperimentSpec& spec, const SystemConfig& config,
                      const std::string& scheme, std::size_t n, JobSizeKind dist,
                      std::uint64_t seed) {
  SimConfig sim;
  sim.system = config;
  sim.n_servers = n;
  sim.job_size = {dist, config.mu};
  sim.horizon = spec.jobs;
  sim.replications = spec.replications;
  sim.seed = seed;
  sim.threads = spec.threads;

  CsvRow row{config.arrival_rate, scheme, "simulation", n, sim.job_size.name(),
             kNaN, kNaN, "ok"};
  const bool beyond_static = config.arrival_rate >= static_limit(config);
  try {
    if (scheme == "static") {
      sim.scheme = Scheme::static_routing(solve_static(config).probabilities);
    } else if (scheme == "hybrid") {
      sim.scheme = Scheme::hybrid(solve_hybrid(config).probabilities);
    } else {
      const std::size_t d = sq_choices(scheme);
      sim.scheme = Scheme::sq_d(d);
      if (beyond_static || (d == 2 && config.arrival_rate >= finite_n_limit(config, n))) {
        row.status = "diverged";
      }
    }
  } catch (const Error& e) {
    if (!is_instability(e.kind())) throw;
    row.status = "diverged";
    return row;
  }
  // Unstable SQ(d) points still run: a finite horizon always terminates and
  // the value shows how far the farm has drifted.
  const SimResult result = run(sim);
  row.value = result.mean_sojourn;
  row.ci = result.ci_half_width;
  return row;
}

}  // namespace

SystemConfig fig1_system() { return two_class(4.0 / 3.0, 2.0 / 3.0); }
SystemConfig fig2_system() { return two_class(5.0 / 3.0, 1.0 / 3.0); }

ExperimentSpec preset_experiment(const std::string& name) {
  ExperimentSpec spec;
  spec.name = name;
  if (name == "fig1") {
    spec.system = fig1_system();
    spec.sweep = tenths();
    spec.schemes = {"static", "sq2", "hybrid"};
  } else if (name == "fig2") {
    spec.system = fig2_system();
    spec.sweep = tenths();
    spec.schemes = {"static", "sq2", "hybrid", "sq5"};
  } else if (name == "fig3") {
    spec.system = fig1_system();
    spec.sweep = tenths();
    spec.schemes = {"sq2"};
    spec.farm_sizes = {10, 50, 100, 200};
  } else if (name == "table1") {
    spec.system = fig1_system();
    spec.sweep = {0.2, 0.3, 0.5, 0.7, 0.8, 0.9};
    spec.schemes = {"sq2"};
    spec.distributions = {JobSizeKind::Exponential, JobSizeKind::Deterministic,
                          JobSizeKind::PowerLaw};
  } else {
    fail(ErrorKind::ConfigError, "unknown experiment '" + name +
                                     "' (expected fig1, fig2, fig3 or table1)");
  }
  return spec;
}

void validate(const ExperimentSpec& spec) {
  if (spec.system.class_count() == 0) fail(ErrorKind::ConfigError, "experiment has no classes");
  if (spec.sweep.empty()) fail(ErrorKind::ConfigError, "empty arrival-rate sweep");
  if (spec.schemes.empty()) fail(ErrorKind::ConfigError, "no schemes selected");
  if (spec.simulate && spec.farm_sizes.empty()) fail(ErrorKind::ConfigError, "no farm sizes");
  if (spec.simulate && spec.distributions.empty()) {
    fail(ErrorKind::ConfigError, "no job-size distributions");
  }
  for (const auto& s : spec.schemes) {
    if (!known_scheme(s)) fail(ErrorKind::ConfigError, "unknown scheme '" + s + "'");
  }
  const double limit = static_limit(spec.system);
  for (double lambda : spec.sweep) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      fail(ErrorKind::ConfigError, "sweep values must be positive");
    }
    if (lambda >= limit && !spec.allow_unstable) {
      fail(ErrorKind::ConfigError, "lambda = " + format_double(lambda) +
                                       " is at or above the static limit " +
                                       format_double(limit) +
                                       "; pass --allow-unstable to keep it");
    }
  }
}

std::vector<CsvRow> reproduce(const ExperimentSpec& spec,
                              const std::function<void(const CsvRow&)>& on_row) {
  validate(spec);
  std::vector<CsvRow> rows;
  auto emit = [&](CsvRow row) {
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  };

  for (std::size_t i = 0; i < spec.sweep.size(); ++i) {
    const SystemConfig config = spec.system.with_arrival_rate(spec.sweep[i]);
    // Every scheme at one sweep point shares a seed (common random numbers).
    const std::uint64_t seed = spec.seed + 7919 * static_cast<std::uint64_t>(i);
    for (const auto& scheme : spec.schemes) {
      const std::size_t d = sq_choices(scheme);
      if (spec.analytic && (d == 0 || d == 2)) emit(analytic_row(config, scheme));
      if (!spec.simulate) continue;
      for (std::size_t n : spec.farm_sizes) {
        for (JobSizeKind dist : spec.distributions) {
          emit(simulation_row(spec, config, scheme, n, dist, seed));
        }
      }
    }
  }
  return rows;
}

void write_csv_header(std::ostream& out, const std::string& experiment) {
  out << "# " << kCsvSchemaVersion << " experiment=" << experiment << '\n';
  write_csv_row(out, {"lambda", "scheme", "source", "n", "dist", "value", "ci", "status"});
}

void write_csv(std::ostream& out, const CsvRow& row) {
  const bool analytic = row.source == "meanfield";
  write_csv_row(out, {format_double(row.lambda), row.scheme, row.source,
                      analytic ? "" : std::to_string(row.n), row.dist,
                      format_double(row.value),
                      analytic ? "" : format_double(row.ci), row.status});
}

}  // namespace hetjsq
