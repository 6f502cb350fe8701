#include "hetjsq/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "hetjsq/error.hpp"

namespace hetjsq {

namespace {

void require_enumerable(const SystemConfig& config) {
  if (config.class_count() > kMaxEnumeratedClasses) {
    std::ostringstream os;
    os << config.class_count() << " classes exceed the enumeration cap of "
       << kMaxEnumeratedClasses;
    fail(ErrorKind::TooManyClasses, os.str());
  }
}

std::vector<std::size_t> subset_members(std::uint32_t mask) {
  std::vector<std::size_t> members;
  for (std::size_t j = 0; mask != 0; ++j, mask >>= 1) {
    if (mask & 1u) members.push_back(j);
  }
  return members;
}

}  // namespace

double static_limit(const SystemConfig& config) {
  return config.mu * config.mean_capacity();
}

AsymptoticLimit asymptotic_sq2_limit(const SystemConfig& config) {
  require_enumerable(config);
  const std::size_t m = config.class_count();
  const std::uint32_t end = std::uint32_t{1} << m;

  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 1; mask < end; ++mask) {
    double work = 0.0;
    double share = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask & (std::uint32_t{1} << j)) {
        work += config.fraction(j) * config.capacity(j);
        share += config.fraction(j);
      }
    }
    const double ratio = work / (share * share);
    if (ratio < best) {
      best = ratio;
      best_mask = mask;
    }
  }
  return {config.mu * best, subset_members(best_mask)};
}

bool check_subset_condition(const SystemConfig& config) {
  require_enumerable(config);
  if (config.arrival_rate <= 0.0) return true;
  const std::size_t m = config.class_count();
  const auto nu = config.offered_loads();
  const std::uint32_t end = std::uint32_t{1} << m;
  for (std::uint32_t mask = 1; mask < end; ++mask) {
    double lhs = 0.0;
    double share = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask & (std::uint32_t{1} << j)) {
        lhs += config.fraction(j) / nu[j];
        share += config.fraction(j);
      }
    }
    if (!(lhs > share * share)) return false;
  }
  return true;
}

namespace {

// Tolerance on N * gamma_j being integral; fractions arrive as decimals.
constexpr double kIntegralSlack = 1e-9;

bool integral_split(const SystemConfig& config, std::size_t n,
                    std::vector<std::size_t>* sizes) {
  if (sizes != nullptr) sizes->clear();
  std::size_t total = 0;
  for (const auto& c : config.classes) {
    const double exact = static_cast<double>(n) * c.fraction;
    const double rounded = std::round(exact);
    if (rounded < 1.0 || std::abs(exact - rounded) > kIntegralSlack * std::max(1.0, exact)) {
      return false;
    }
    total += static_cast<std::size_t>(rounded);
    if (sizes != nullptr) sizes->push_back(static_cast<std::size_t>(rounded));
  }
  return total == n;
}

}  // namespace

std::size_t lattice_base_size(const SystemConfig& config,
                              std::size_t search_limit) {
  for (std::size_t n = 3; n <= search_limit; ++n) {
    if (integral_split(config, n, nullptr)) return n;
  }
  fail(ErrorKind::NonIntegerClassSizes,
       "no farm size up to the search limit splits into whole classes");
}

std::vector<std::size_t> class_sizes(const SystemConfig& config,
                                     std::size_t n) {
  std::vector<std::size_t> sizes;
  if (!integral_split(config, n, &sizes)) {
    std::ostringstream os;
    os << "N = " << n << " does not split into whole classes";
    fail(ErrorKind::NonIntegerClassSizes, os.str());
  }
  return sizes;
}

double finite_n_limit(const SystemConfig& config, std::size_t n) {
  if (n < 2) fail(ErrorKind::NTooSmall, "need at least two servers");
  const auto sizes = class_sizes(config, n);

  // For a fixed subset size s the binding subset is the s slowest servers,
  // so scanning prefixes of the capacity-ascending server list is exact.
  std::vector<std::size_t> order(config.class_count());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return config.capacity(a) < config.capacity(b);
  });

  const double nd = static_cast<double>(n);
  double best = std::numeric_limits<double>::infinity();
  double capacity_sum = 0.0;
  std::size_t s = 0;
  for (std::size_t j : order) {
    for (std::size_t r = 0; r < sizes[j]; ++r) {
      capacity_sum += config.capacity(j);
      ++s;
      if (s < 2) continue;
      const double sd = static_cast<double>(s);
      best = std::min(best, capacity_sum * (nd - 1.0) / (sd * (sd - 1.0)));
    }
  }
  return config.mu * best;
}

StabilityReport stability_report(const SystemConfig& config,
                                 std::optional<std::size_t> n) {
  StabilityReport report;
  report.static_limit = static_limit(config);
  auto asym = asymptotic_sq2_limit(config);
  report.asymptotic_sq2_limit = asym.rate;
  report.binding_subset = std::move(asym.binding_subset);
  if (n) {
    report.n_servers = n;
    report.finite_n_limit = finite_n_limit(config, *n);
  }
  return report;
}

}  // namespace hetjsq
