#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hetjsq/model.hpp"

namespace hetjsq {

/// Largest class count accepted by subset enumeration.
inline constexpr std::size_t kMaxEnumeratedClasses = 24;

/// All limits are suprema of open intervals: an arrival rate equal to a
/// limit is unstable.
struct StabilityReport {
  double static_limit = 0.0;
  double asymptotic_sq2_limit = 0.0;
  std::optional<double> finite_n_limit;
  std::optional<std::size_t> n_servers;
  std::vector<std::size_t> binding_subset;  // 0-based class indices
};

struct AsymptoticLimit {
  double rate = 0.0;
  std::vector<std::size_t> binding_subset;  // 0-based class indices
};

/// Stability limit under state-independent routing: mu * sum_j gamma_j C_j.
double static_limit(const SystemConfig& config);

/// Limit of the SQ(2) stability regions as N grows:
/// mu * min over nonempty I of (sum_I gamma_j C_j) / (sum_I gamma_j)^2.
/// Throws TooManyClasses when there are more than 24 classes.
AsymptoticLimit asymptotic_sq2_limit(const SystemConfig& config);

/// Evaluates sum_I gamma_j / nu_j > (sum_I gamma_j)^2 for every nonempty I.
/// Independent of asymptotic_sq2_limit; the two must agree.
bool check_subset_condition(const SystemConfig& config);

/// Smallest N > 2 for which N * gamma_j is a positive integer for every class.
/// Throws NonIntegerClassSizes when none exists below `search_limit`.
std::size_t lattice_base_size(const SystemConfig& config,
                              std::size_t search_limit = 1'000'000);

/// Number of servers per class for a farm of `n` servers. Throws
/// NonIntegerClassSizes when some n * gamma_j is not an integer.
std::vector<std::size_t> class_sizes(const SystemConfig& config, std::size_t n);

/// Supremum of the SQ(2) stability region for a farm of exactly `n` servers.
/// Throws NTooSmall for n < 2 and NonIntegerClassSizes when the fractions do
/// not split n servers into whole classes.
double finite_n_limit(const SystemConfig& config, std::size_t n);

StabilityReport stability_report(const SystemConfig& config,
                                 std::optional<std::size_t> n = std::nullopt);

}  // namespace hetjsq
