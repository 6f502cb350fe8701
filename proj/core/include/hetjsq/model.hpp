#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hetjsq {

/// Default number of retained occupancy levels above zero.
inline constexpr std::size_t kDefaultTruncation = 64;
/// Largest tail value tolerated at the truncation level.
inline constexpr double kTailTolerance = 1e-14;

struct ServerClass {
  double capacity = 1.0;  // work units per unit time
  double fraction = 1.0;  // share of servers in this class
};

/// Arrival rate is normalized per server: the farm of N servers sees Poisson
/// arrivals at rate N * arrival_rate. Job sizes have mean 1 / mu.
struct SystemConfig {
  std::vector<ServerClass> classes;
  double arrival_rate = 0.0;
  double mu = 1.0;

  std::size_t class_count() const noexcept { return classes.size(); }
  double capacity(std::size_t j) const { return classes[j].capacity; }
  double fraction(std::size_t j) const { return classes[j].fraction; }

  /// Per-class offered load lambda / (mu * C_j).
  double offered_load(std::size_t j) const {
    return arrival_rate / (mu * classes[j].capacity);
  }
  std::vector<double> offered_loads() const;

  /// Mean capacity sum_j gamma_j C_j.
  double mean_capacity() const;

  SystemConfig with_arrival_rate(double lambda) const {
    SystemConfig copy = *this;
    copy.arrival_rate = lambda;
    return copy;
  }
};

/// Checks and normalizes a candidate configuration: classes are sorted by
/// descending capacity and fractions that are off by less than 1e-9 are
/// renormalized. Duplicate capacities are kept; a note is appended to
/// `warnings` when it is non-null.
SystemConfig validate_config(SystemConfig raw,
                             std::vector<std::string>* warnings = nullptr);

/// Dense classes-by-levels matrix of doubles. Level 0 is the first column.
class LevelArray {
 public:
  LevelArray() = default;
  LevelArray(std::size_t classes, std::size_t levels, double fill = 0.0)
      : classes_(classes), levels_(levels), data_(classes * levels, fill) {}

  std::size_t classes() const noexcept { return classes_; }
  std::size_t levels() const noexcept { return levels_; }

  double& operator()(std::size_t j, std::size_t k) {
    return data_[j * levels_ + k];
  }
  double operator()(std::size_t j, std::size_t k) const {
    return data_[j * levels_ + k];
  }

  std::span<double> row(std::size_t j) {
    return {data_.data() + j * levels_, levels_};
  }
  std::span<const double> row(std::size_t j) const {
    return {data_.data() + j * levels_, levels_};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  double max_abs() const;

  friend bool operator==(const LevelArray&, const LevelArray&) = default;

 private:
  std::size_t classes_ = 0;
  std::size_t levels_ = 0;
  std::vector<double> data_;
};

/// Tail probabilities (P_0, ..., P_K) of one server class. P_0 is exactly 1
/// and the sequence is nonincreasing and nonnegative.
class TailVector {
 public:
  /// Throws DomainError when the values are not a valid tail sequence.
  explicit TailVector(std::vector<double> values);

  std::size_t truncation() const noexcept { return values_.size() - 1; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const noexcept { return values_; }

  /// True when P_K does not exceed `tolerance`.
  bool within_tolerance(double tolerance = kTailTolerance) const {
    return values_.back() <= tolerance;
  }

  /// sum_{k>=1} P_k, the mean occupancy.
  double mean_occupancy() const;

 private:
  std::vector<double> values_;
};

/// Per-class tail vectors sharing a common truncation.
class TailFamily {
 public:
  TailFamily() = default;
  /// Validates every row as a tail sequence (monotone within `slack`).
  explicit TailFamily(LevelArray values, double slack = 0.0);

  /// Empty system: P_0 = 1 and zero elsewhere.
  static TailFamily empty(std::size_t classes, std::size_t truncation);

  std::size_t classes() const noexcept { return values_.classes(); }
  std::size_t truncation() const noexcept { return values_.levels() - 1; }
  double operator()(std::size_t j, std::size_t k) const {
    return values_(j, k);
  }
  TailVector class_tail(std::size_t j) const;
  const LevelArray& array() const noexcept { return values_; }

  bool within_tolerance(double tolerance = kTailTolerance) const;

 private:
  LevelArray values_;
};

}  // namespace hetjsq
