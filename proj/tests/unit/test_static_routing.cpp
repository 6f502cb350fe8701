#include <doctest.h>

#include <numeric>

#include "hetjsq/stability.hpp"
#include "hetjsq/static_routing.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace hetjsq;
using hetjsq::test::error_kind;
using hetjsq::test::make_config;

TEST_SUITE("static_routing") {

TEST_CASE("two-class optimum at lambda = 0.5") {
  const auto c = make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 0.5);
  const auto s = solve_static(c);
  CHECK(s.active_set_size == 2);
  // Frozen from the closed form evaluated independently in double precision.
  CHECK(s.loads[0] == doctest::Approx(0.5606601717798212).epsilon(1e-13));
  CHECK(s.loads[1] == doctest::Approx(0.3786796564403574).epsilon(1e-13));
  CHECK(s.probabilities[0] == doctest::Approx(0.7475468957064282).epsilon(1e-13));
  CHECK(s.probabilities[1] == doctest::Approx(0.2524531042935716).epsilon(1e-13));
  CHECK(s.mean_sojourn == doctest::Approx(1.8856180831641263).epsilon(1e-13));

  const auto grid = oracle::grid_search_static(c);
  CHECK(oracle::static_objective(c, s.loads) <= grid.objective + 1e-12);
}

TEST_CASE("single class is an M/G/1-PS queue") {
  const auto c = make_config({{1.0, 1.0}}, 0.9);
  const auto s = solve_static(c);
  CHECK(s.active_set_size == 1);
  CHECK(s.loads[0] == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(s.probabilities[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.mean_sojourn == doctest::Approx(10.0).epsilon(1e-13));
}

TEST_CASE("light load uses only the fastest class") {
  auto c = make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 0.01);
  auto s = solve_static(c);
  CHECK(s.active_set_size == 1);
  CHECK(s.loads[1] == 0.0);
  CHECK(s.probabilities[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.probabilities[1] == 0.0);
  const auto grid = oracle::grid_search_static(c);
  CHECK(grid.loads[1] <= 1e-12);

  // Class 2 switches on at lambda = W - S sqrt(C_2) = 0.19526214587563506.
  CHECK(solve_static(c.with_arrival_rate(0.1952)).active_set_size == 1);
  CHECK(solve_static(c.with_arrival_rate(0.1953)).active_set_size == 2);
}

TEST_CASE("invariants on a three-class farm") {
  const auto c = make_config({{3.0, 0.2}, {1.5, 0.3}, {0.5, 0.5}}, 0.9, 0.8);
  const auto s = solve_static(c);
  double work = 0.0;
  for (std::size_t j = 0; j < 3; ++j) work += c.fraction(j) * c.capacity(j) * s.loads[j];
  CHECK(work == doctest::Approx(c.arrival_rate / c.mu).epsilon(1e-12));
  CHECK(std::accumulate(s.probabilities.begin(), s.probabilities.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.loads[0] >= s.loads[1]);
  CHECK(s.loads[1] >= s.loads[2]);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK((j < s.active_set_size) == (s.loads[j] > 0.0));
  }
}

TEST_CASE("tied capacities activate together with equal loads") {
  const auto c = make_config({{2.0, 0.3}, {1.0, 0.3}, {1.0, 0.4}}, 1.0);
  const auto s = solve_static(c);
  CHECK(s.active_set_size == 3);
  CHECK(s.loads[1] == doctest::Approx(s.loads[2]).epsilon(1e-14));
}

TEST_CASE("errors") {
  const auto c = make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 1.0);
  CHECK(error_kind([&] { solve_static(c); }) == ErrorKind::Unstable);
  CHECK(error_kind([&] { solve_static(c.with_arrival_rate(1.5)); }) == ErrorKind::Unstable);
  CHECK(error_kind([&] { solve_static(c.with_arrival_rate(0.0)); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("continuity in lambda away from activation thresholds") {
  const auto c = make_config({{3.0, 0.2}, {1.5, 0.3}, {0.5, 0.5}}, 0.0);
  for (double lambda = 0.3; lambda < 1.3; lambda += 0.07) {
    const auto a = solve_static(c.with_arrival_rate(lambda));
    const auto b = solve_static(c.with_arrival_rate(lambda + 1e-4));
    if (a.active_set_size != b.active_set_size) continue;
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(a.loads[j] - b.loads[j]) < 1e-3);
  }
}

}  // TEST_SUITE
