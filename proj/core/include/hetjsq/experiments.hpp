#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hetjsq/model.hpp"
#include "hetjsq/simulator.hpp"

namespace hetjsq {

/// Schemes accepted in a sweep: "static", "sq2", "sq<d>" (simulation only
/// for d != 2) and "hybrid".
struct ExperimentSpec {
  std::string name = "custom";  // fig1 | fig2 | fig3 | table1 | custom
  SystemConfig system;          // arrival_rate is ignored; the sweep sets it
  std::vector<double> sweep;
  std::vector<std::string> schemes;
  std::vector<std::size_t> farm_sizes{200};
  std::vector<JobSizeKind> distributions{JobSizeKind::Exponential};
  bool analytic = true;
  bool simulate = true;
  std::uint64_t jobs = 2'000'000;
  std::size_t replications = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  bool allow_unstable = false;
};

/// Built-in recipes for the two-class farms C = (4/3, 2/3) and (5/3, 1/3).
/// Throws ConfigError for an unknown name.
ExperimentSpec preset_experiment(const std::string& name);

SystemConfig fig1_system();  // C = (4/3, 2/3), gamma = (1/2, 1/2), mu = 1
SystemConfig fig2_system();  // C = (5/3, 1/3), gamma = (1/2, 1/2), mu = 1

struct CsvRow {
  double lambda = 0.0;
  std::string scheme;
  std::string source;  // meanfield | simulation
  std::size_t n = 0;   // farm size; 0 for analytic rows
  std::string dist;    // job-size law; empty for analytic rows
  double value = 0.0;  // mean sojourn time
  double ci = 0.0;     // 95% half-width; 0 for analytic rows
  std::string status;  // ok | diverged
};

/// Throws ConfigError when a sweep point is outside [0, static limit) and
/// unstable points were not allowed, or when a scheme name is unknown.
void validate(const ExperimentSpec& spec);

/// Runs every (lambda, scheme, source) combination. Points where a scheme is
/// unstable produce `diverged` rows instead of errors. `on_row` sees each row
/// as soon as it is computed.
std::vector<CsvRow> reproduce(const ExperimentSpec& spec,
                              const std::function<void(const CsvRow&)>& on_row = {});

inline constexpr const char* kCsvSchemaVersion = "hetjsq-csv v1";

void write_csv_header(std::ostream& out, const std::string& experiment);
void write_csv(std::ostream& out, const CsvRow& row);

}  // namespace hetjsq
