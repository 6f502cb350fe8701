#include "hetjsq/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hetjsq/error.hpp"

namespace hetjsq {

std::vector<double> SystemConfig::offered_loads() const {
  std::vector<double> nu(classes.size());
  for (std::size_t j = 0; j < classes.size(); ++j) nu[j] = offered_load(j);
  return nu;
}

double SystemConfig::mean_capacity() const {
  double sum = 0.0;
  for (const auto& c : classes) sum += c.fraction * c.capacity;
  return sum;
}

SystemConfig validate_config(SystemConfig raw,
                             std::vector<std::string>* warnings) {
  if (raw.classes.empty()) fail(ErrorKind::EmptyClassList, "no server classes");
  if (!std::isfinite(raw.mu) || raw.mu <= 0.0) {
    fail(ErrorKind::InvalidArgument, "mu must be positive and finite");
  }
  if (!std::isfinite(raw.arrival_rate) || raw.arrival_rate < 0.0) {
    fail(ErrorKind::InvalidArgument, "lambda must be nonnegative and finite");
  }
  for (std::size_t j = 0; j < raw.classes.size(); ++j) {
    const auto& c = raw.classes[j];
    if (!std::isfinite(c.capacity) || c.capacity <= 0.0) {
      std::ostringstream os;
      os << "class " << j + 1 << " has capacity " << c.capacity;
      fail(ErrorKind::NonPositiveCapacity, os.str());
    }
    if (!std::isfinite(c.fraction) || c.fraction <= 0.0 || c.fraction > 1.0) {
      std::ostringstream os;
      os << "class " << j + 1 << " has fraction " << c.fraction
         << " outside (0, 1]";
      fail(ErrorKind::InvalidArgument, os.str());
    }
  }

  double total = 0.0;
  for (const auto& c : raw.classes) total += c.fraction;
  if (std::abs(total - 1.0) >= 1e-9) {
    std::ostringstream os;
    os.precision(17);
    os << "fractions sum to " << total;
    fail(ErrorKind::FractionsDontSumToOne, os.str());
  }
  if (total != 1.0) {
    for (auto& c : raw.classes) c.fraction /= total;
  }

  std::stable_sort(raw.classes.begin(), raw.classes.end(),
                   [](const ServerClass& a, const ServerClass& b) {
                     return a.capacity > b.capacity;
                   });

  if (warnings != nullptr) {
    for (std::size_t j = 1; j < raw.classes.size(); ++j) {
      if (raw.classes[j].capacity == raw.classes[j - 1].capacity) {
        std::ostringstream os;
        os << "classes " << j << " and " << j + 1 << " share capacity "
           << raw.classes[j].capacity << "; they are kept separate";
        warnings->push_back(os.str());
      }
    }
  }
  return raw;
}

double LevelArray::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

void check_tail_row(std::span<const double> row, double slack) {
  if (row.empty()) fail(ErrorKind::DomainError, "empty tail vector");
  if (row[0] != 1.0) fail(ErrorKind::DomainError, "tail vector must start at 1");
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (!(row[k] >= -slack) || row[k] > row[k - 1] + slack) {
      std::ostringstream os;
      os << "tail vector is not nonincreasing and nonnegative at level " << k;
      fail(ErrorKind::DomainError, os.str());
    }
  }
}

}  // namespace

TailVector::TailVector(std::vector<double> values) : values_(std::move(values)) {
  check_tail_row(values_, 0.0);
}

double TailVector::mean_occupancy() const {
  return std::accumulate(values_.begin() + 1, values_.end(), 0.0);
}

TailFamily::TailFamily(LevelArray values, double slack)
    : values_(std::move(values)) {
  if (values_.classes() == 0) fail(ErrorKind::DomainError, "no classes");
  for (std::size_t j = 0; j < values_.classes(); ++j) {
    check_tail_row(values_.row(j), slack);
  }
}

TailFamily TailFamily::empty(std::size_t classes, std::size_t truncation) {
  LevelArray a(classes, truncation + 1, 0.0);
  for (std::size_t j = 0; j < classes; ++j) a(j, 0) = 1.0;
  return TailFamily(std::move(a));
}

TailVector TailFamily::class_tail(std::size_t j) const {
  auto r = values_.row(j);
  return TailVector(std::vector<double>(r.begin(), r.end()));
}

bool TailFamily::within_tolerance(double tolerance) const {
  for (std::size_t j = 0; j < classes(); ++j) {
    if (values_(j, truncation()) > tolerance) return false;
  }
  return true;
}

}  // namespace hetjsq
