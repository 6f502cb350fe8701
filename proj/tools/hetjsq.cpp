// hetjsq: stability limits, optimal routing, mean-field equilibria and
// simulation of SQ(2) routing in heterogeneous processor-sharing farms.
//
// Exit codes: 0 success, 2 config error, 3 instability, 4 non-convergence.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetjsq/config_io.hpp"
#include "hetjsq/error.hpp"
#include "hetjsq/experiments.hpp"
#include "hetjsq/hybrid.hpp"
#include "hetjsq/meanfield.hpp"
#include "hetjsq/simulator.hpp"
#include "hetjsq/stability.hpp"
#include "hetjsq/static_routing.hpp"

namespace {

using namespace hetjsq;

struct GlobalOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  bool quiet = false;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) fail(ErrorKind::ConfigError, "cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

SystemConfig load(const GlobalOptions& g) {
  if (g.config_path.empty()) fail(ErrorKind::ConfigError, "--config is required");
  std::vector<std::string> warnings;
  SystemConfig config = load_config(g.config_path, &warnings);
  if (g.lambda) config = validate_config(config.with_arrival_rate(*g.lambda));
  if (!g.quiet) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  }
  return config;
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t m) {
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= m; ++j) names.push_back(prefix + std::to_string(j));
  return names;
}

void append(std::vector<std::string>& fields, const std::vector<double>& values) {
  for (double v : values) fields.push_back(format_double(v));
}

std::string subset_text(const std::vector<std::size_t>& subset) {
  std::string s;
  for (std::size_t j : subset) {
    if (!s.empty()) s += ';';
    s += std::to_string(j + 1);
  }
  return s;
}

void cmd_stability(const GlobalOptions& g, std::optional<std::size_t> n) {
  const SystemConfig config = load(g);
  if (!n) n = lattice_base_size(config);
  const StabilityReport r = stability_report(config, n);
  Output out(g.out_path);
  write_csv_row(out.stream(), {"static_limit", "asymptotic_sq2_limit", "finite_n_limit",
                               "n", "binding_subset"});
  write_csv_row(out.stream(), {format_double(r.static_limit),
                               format_double(r.asymptotic_sq2_limit),
                               format_double(*r.finite_n_limit), std::to_string(*n),
                               subset_text(r.binding_subset)});
  if (!g.quiet) {
    std::cerr << "static routing:       lambda < " << r.static_limit << '\n'
              << "SQ(2), N -> infinity: lambda < " << r.asymptotic_sq2_limit
              << " (binding classes " << subset_text(r.binding_subset) << ")\n"
              << "SQ(2), N = " << *n << ":        lambda < " << *r.finite_n_limit << '\n';
  }
}

void cmd_static(const GlobalOptions& g) {
  const SystemConfig config = load(g);
  const StaticRoutingSolution s = solve_static(config);
  const std::size_t m = config.class_count();
  Output out(g.out_path);
  std::vector<std::string> header{"j_star"};
  for (auto& h : numbered("rho_", m)) header.push_back(h);
  for (auto& h : numbered("p_", m)) header.push_back(h);
  header.push_back("mean_sojourn");
  write_csv_row(out.stream(), header);
  std::vector<std::string> row{std::to_string(s.active_set_size)};
  append(row, s.loads);
  append(row, s.probabilities);
  row.push_back(format_double(s.mean_sojourn));
  write_csv_row(out.stream(), row);
}

void cmd_hybrid(const GlobalOptions& g, const std::string& bias) {
  const SystemConfig config = load(g);
  HybridSolution s;
  double theta = 0.0;
  if (bias == "optimal") {
    s = solve_hybrid(config);
    theta = s.theta_star;
  } else {
    s = evaluate_hybrid_bias(config, proportional_bias(config));
    theta = std::numeric_limits<double>::quiet_NaN();
  }
  const std::size_t m = config.class_count();
  Output out(g.out_path);
  std::vector<std::string> header{"j_star", "theta_star"};
  for (auto& h : numbered("rho_", m)) header.push_back(h);
  for (auto& h : numbered("p_", m)) header.push_back(h);
  header.push_back("mean_sojourn");
  write_csv_row(out.stream(), header);
  std::vector<std::string> row{std::to_string(s.active_set_size), format_double(theta)};
  append(row, s.loads);
  append(row, s.probabilities);
  row.push_back(format_double(s.mean_sojourn));
  write_csv_row(out.stream(), row);
}

void cmd_meanfield(const GlobalOptions& g, const std::string& method, std::size_t levels) {
  const SystemConfig config = load(g);
  EquilibriumOptions options;
  options.truncation = levels;
  if (method == "shooting") options.method = EquilibriumMethod::ShootingM2;
  if (method == "ode") options.method = EquilibriumMethod::OdeRelaxation;
  const EquilibriumResult eq = fixed_point(config, options);
  const SojournEstimate t = mean_sojourn_from_tails(eq.tails, config);
  const std::size_t m = config.class_count();

  Output out(g.out_path);
  std::vector<std::string> header{"k"};
  for (auto& h : numbered("P_", m)) header.push_back(h);
  write_csv_row(out.stream(), header);
  for (std::size_t k = 0; k <= eq.tails.truncation(); ++k) {
    std::vector<std::string> row{std::to_string(k)};
    for (std::size_t j = 0; j < m; ++j) row.push_back(format_double(eq.tails(j, k)));
    write_csv_row(out.stream(), row);
  }
  out.stream() << "# summary\n";
  write_csv_row(out.stream(), {"mean_sojourn", "truncation_bound", "drift_residual",
                               "identity_residual", "recursion_residual", "alpha",
                               "method", "certified"});
  write_csv_row(out.stream(),
                {format_double(t.mean), format_double(t.truncation_bound),
                 format_double(eq.residual), format_double(eq.identity_residual),
                 format_double(eq.recursion_residual),
                 eq.alpha ? format_double(*eq.alpha) : "", to_string(eq.method),
                 eq.certified() ? "true" : "false"});
  if (eq.shooting_fell_back && !g.quiet) {
    std::cerr << "warning: shooting could not be certified; used ODE relaxation\n";
  }
  if (!eq.certified()) {
    fail(ErrorKind::NoConvergence, "equilibrium did not pass certification");
  }
}

struct SimulateOptions {
  std::string scheme = "sq2";
  std::size_t d = 2;
  std::size_t n = 200;
  std::uint64_t jobs = 2'000'000;
  std::size_t reps = 10;
  std::string dist = "exp";
  std::size_t threads = 0;
  std::size_t levels = 8;
};

void cmd_simulate(const GlobalOptions& g, const SimulateOptions& o) {
  const SystemConfig config = load(g);
  SimConfig sim;
  sim.system = config;
  sim.n_servers = o.n;
  sim.horizon = o.jobs;
  sim.replications = o.reps;
  sim.seed = g.seed.value_or(1);
  sim.threads = o.threads;
  sim.tail_levels = std::max<std::size_t>(o.levels, 1);
  sim.job_size.mu = config.mu;
  if (o.dist == "const") sim.job_size.kind = JobSizeKind::Deterministic;
  if (o.dist == "powerlaw") sim.job_size.kind = JobSizeKind::PowerLaw;
  if (o.scheme == "static") {
    sim.scheme = Scheme::static_routing(solve_static(config).probabilities);
  } else if (o.scheme == "hybrid") {
    sim.scheme = Scheme::hybrid(solve_hybrid(config).probabilities);
  } else {
    sim.scheme = Scheme::sq_d(o.scheme == "sq2" ? 2 : o.d);
  }
  const SimResult r = run(sim);
  const std::size_t m = config.class_count();

  Output out(g.out_path);
  write_csv_row(out.stream(), {"replication", "mean_sojourn", "ci_half_width"});
  for (std::size_t i = 0; i < r.replications.size(); ++i) {
    write_csv_row(out.stream(), {std::to_string(i + 1),
                                 format_double(r.replications[i].mean_sojourn), ""});
  }
  write_csv_row(out.stream(), {"all", format_double(r.mean_sojourn),
                               format_double(r.ci_half_width)});
  out.stream() << "# tails\n";
  std::vector<std::string> header{"k"};
  for (auto& h : numbered("P_", m)) header.push_back(h);
  write_csv_row(out.stream(), header);
  for (std::size_t k = 0; k <= r.empirical_tails.truncation(); ++k) {
    std::vector<std::string> row{std::to_string(k)};
    for (std::size_t j = 0; j < m; ++j) {
      row.push_back(format_double(r.empirical_tails(j, k)));
    }
    write_csv_row(out.stream(), row);
  }
  if (!g.quiet) {
    std::cerr << sim.scheme.name() << ", N = " << o.n << ", " << sim.job_size.name()
              << " sizes: mean sojourn " << r.mean_sojourn << " +- " << r.ci_half_width
              << " (" << r.events << " events)\n";
  }
}

struct ReproduceOptions {
  std::string name;
  std::optional<std::uint64_t> jobs;
  std::optional<std::size_t> reps;
  std::vector<double> lambdas;
  std::vector<std::string> schemes;
  std::vector<std::size_t> farm_sizes;
  std::size_t threads = 0;
  bool allow_unstable = false;
  bool analytic_only = false;
};

void cmd_reproduce(const GlobalOptions& g, const ReproduceOptions& o) {
  ExperimentSpec spec;
  if (o.name == "custom") {
    spec.system = load(g);
    spec.schemes = {"static", "sq2", "hybrid"};
  } else {
    spec = preset_experiment(o.name);
  }
  if (!o.lambdas.empty()) spec.sweep = o.lambdas;
  if (!o.schemes.empty()) spec.schemes = o.schemes;
  if (!o.farm_sizes.empty()) spec.farm_sizes = o.farm_sizes;
  if (o.jobs) spec.jobs = *o.jobs;
  if (o.reps) spec.replications = *o.reps;
  if (g.seed) spec.seed = *g.seed;
  spec.threads = o.threads;
  spec.allow_unstable = o.allow_unstable;
  spec.simulate = !o.analytic_only;

  Output out(g.out_path);
  write_csv_header(out.stream(), spec.name);
  reproduce(spec, [&](const CsvRow& row) {
    write_csv(out.stream(), row);
    out.stream().flush();
    if (!g.quiet) {
      std::cerr << spec.name << ": lambda=" << row.lambda << ' ' << row.scheme << ' '
                << row.source << (row.n ? " N=" + std::to_string(row.n) : "") << ' '
                << row.dist << " -> " << row.value << ' ' << row.status << '\n';
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized JSQ routing in heterogeneous processor-sharing farms"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "System config (JSON)");
  app.add_option("--out", g.out_path, "Write CSV here instead of stdout");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--lambda", g.lambda, "Override the config arrival rate");
  app.add_flag("--quiet", g.quiet, "Suppress progress and summaries on stderr");

  std::optional<std::size_t> stability_n;
  auto* stability = app.add_subcommand("stability", "Stability limits for each scheme");
  stability->add_option("--n", stability_n, "Farm size for the finite-N limit")
      ->check(CLI::PositiveNumber);

  auto* static_opt = app.add_subcommand("static-opt", "Delay-optimal static routing");

  std::string method = "auto";
  std::size_t levels = kDefaultTruncation;
  auto* meanfield = app.add_subcommand("meanfield", "Mean-field SQ(2) equilibrium");
  meanfield->add_option("--method", method)
      ->check(CLI::IsMember({"auto", "shooting", "ode"}));
  meanfield->add_option("--levels", levels, "Truncation level K")->check(CLI::Range(2, 100000));

  std::string bias = "optimal";
  auto* hybrid = app.add_subcommand("hybrid-opt", "Delay-optimal hybrid SQ(2) bias");
  hybrid->add_option("--bias", bias)->check(CLI::IsMember({"optimal", "proportional"}));

  SimulateOptions so;
  auto* simulate = app.add_subcommand("simulate", "Discrete-event simulation");
  simulate->add_option("--scheme", so.scheme)
      ->check(CLI::IsMember({"sq2", "static", "hybrid", "sqd"}));
  simulate->add_option("--d", so.d, "Choices for --scheme sqd");
  simulate->add_option("--n", so.n, "Number of servers");
  simulate->add_option("--jobs", so.jobs, "Arrivals per replication");
  simulate->add_option("--reps", so.reps, "Replications");
  simulate->add_option("--dist", so.dist)->check(CLI::IsMember({"exp", "const", "powerlaw"}));
  simulate->add_option("--threads", so.threads, "Worker threads (0: hardware)");
  simulate->add_option("--levels", so.levels, "Empirical tail levels to report");

  ReproduceOptions ro;
  auto* repro = app.add_subcommand("reproduce", "Regenerate a figure or table as CSV");
  repro->add_option("name", ro.name)
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "table1", "custom"}));
  repro->add_option("--jobs", ro.jobs, "Arrivals per replication");
  repro->add_option("--reps", ro.reps, "Replications");
  repro->add_option("--lambda-grid", ro.lambdas, "Replace the arrival-rate sweep");
  repro->add_option("--schemes", ro.schemes, "Replace the scheme list");
  repro->add_option("--n", ro.farm_sizes, "Replace the farm sizes");
  repro->add_option("--threads", ro.threads, "Worker threads (0: hardware)");
  repro->add_flag("--allow-unstable", ro.allow_unstable,
                  "Keep sweep points at or above the static limit");
  repro->add_flag("--analytic-only", ro.analytic_only, "Skip simulation rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*stability) cmd_stability(g, stability_n);
    if (*static_opt) cmd_static(g);
    if (*meanfield) cmd_meanfield(g, method, levels);
    if (*hybrid) cmd_hybrid(g, bias);
    if (*simulate) cmd_simulate(g, so);
    if (*repro) cmd_reproduce(g, ro);
  } catch (const Error& e) {
    std::cerr << "hetjsq: " << e.what() << '\n';
    return exit_code(e.kind());
  }
  return 0;
}
