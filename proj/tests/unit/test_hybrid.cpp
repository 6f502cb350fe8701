#include <doctest.h>

#include <numeric>
#include <random>

#include "hetjsq/hybrid.hpp"
#include "hetjsq/meanfield.hpp"
#include "hetjsq/stability.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace hetjsq;
using hetjsq::test::error_kind;
using hetjsq::test::make_config;

TEST_SUITE("hybrid") {

TEST_CASE("phi inverse series") {
  CHECK(phi_inverse(0.0) == 1.0);
  // 1 + 3/4 + 7/64 + 15/16384 + 31/2^30 + ...
  CHECK(phi_inverse(0.5) == doctest::Approx(1.8602905562147498).epsilon(1e-14));
  CHECK(phi_inverse(0.99) > phi_inverse(0.9));
  CHECK(phi_inverse(0.999) > 100.0);
  CHECK(error_kind([] { phi_inverse(1.0); }) == ErrorKind::DomainError);
  CHECK(error_kind([] { phi_inverse(-0.1); }) == ErrorKind::DomainError);
}

TEST_CASE("phi inverts phi inverse") {
  CHECK(phi(1.0) == 0.0);
  CHECK(phi(0.3) == 0.0);
  CHECK(phi(1.8602905562147498) == doctest::Approx(0.5).epsilon(1e-12));
  for (int i = 1; i <= 9; ++i) {
    const double rho = 0.1 * i;
    CHECK(std::abs(phi(phi_inverse(rho)) - rho) <= 1e-10);
  }
}

TEST_CASE("psi inverse") {
  const auto c = make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 0.5);
  CHECK(psi_inverse(1, 0.75, c) == 0.0);
  CHECK(psi_inverse(1, 0.5, c) == 0.0);
  const auto h = make_config({{1.0, 1.0}}, 0.5);
  for (double theta : {1.2, 2.0, 5.0}) {
    CHECK(psi_inverse(0, theta, h) == doctest::Approx(phi(theta)).epsilon(1e-15));
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    CHECK(psi_inverse(1, a, c) <= psi_inverse(1, b, c));
  }
}

TEST_CASE("psi") {
  const auto h = make_config({{1.0, 1.0}}, 0.5);
  CHECK(psi(0, 0.5, h) == doctest::Approx(1.8602905562147498).epsilon(1e-11));
  const auto c = make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 0.5);
  for (double lambda : {0.1, 0.4, 0.6, 0.95}) {
    CHECK(std::abs(psi_inverse(1, psi(1, lambda, c), c) - lambda) <= 1e-10);
  }
  CHECK(psi(1, 1e-9, c) == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(error_kind([&] { psi(0, 2.0 / 3.0, c); }) == ErrorKind::Unreachable);
  CHECK(error_kind([&] { psi(1, 1.0, c); }) == ErrorKind::Unreachable);
}

TEST_CASE("hybrid tails") {
  const auto zero = hybrid_tails(0.0, 5);
  CHECK(zero[0] == 1.0);
  CHECK(zero[1] == 0.0);
  const auto t = hybrid_tails(0.9, 64);
  CHECK(t[1] == doctest::Approx(0.9));
  CHECK(t[2] == doctest::Approx(0.729));
  CHECK(t[3] == doctest::Approx(0.4782969).epsilon(1e-12));
  CHECK(t.within_tolerance());

  const auto h = make_config({{1.0, 1.0}}, 0.9);
  LevelArray a(1, 65);
  for (std::size_t k = 0; k <= 64; ++k) a(0, k) = t[k];
  CHECK(consistency_residual(TailFamily(a), h) <= 1e-12);
  CHECK(sq2_mean_occupancy(0.9) == doctest::Approx(t.mean_occupancy()).epsilon(1e-14));
}

TEST_CASE("homogeneous farm reduces to plain SQ(2)") {
  const auto h = make_config({{1.0, 1.0}}, 0.5);
  const auto s = solve_hybrid(h);
  CHECK(s.active_set_size == 1);
  CHECK(s.loads[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.probabilities[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.mean_sojourn == doctest::Approx(1.2656860360875726).epsilon(1e-11));
}

TEST_CASE("two-class optimum satisfies KKT and beats the grid") {
  const auto c = make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 0.5);
  const auto s = solve_hybrid(c);
  REQUIRE(s.active_set_size == 2);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(std::abs(phi_inverse(s.loads[j]) - s.theta_star * c.capacity(j)) <= 1e-9);
  }
  double work = 0.0;
  for (std::size_t j = 0; j < 2; ++j) work += c.fraction(j) * c.capacity(j) * s.loads[j];
  CHECK(work == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(s.probabilities[0] + s.probabilities[1] == doctest::Approx(1.0).epsilon(1e-12));
  const auto grid = oracle::grid_search_hybrid(c);
  CHECK(oracle::hybrid_objective(c, s.loads) <= grid.objective + 1e-12);
  CHECK(s.mean_sojourn * c.arrival_rate ==
        doctest::Approx(oracle::hybrid_objective(c, s.loads)).epsilon(1e-12));
}

TEST_CASE("light load uses only the fastest class") {
  const auto c = make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 0.01);
  const auto s = solve_hybrid(c);
  CHECK(s.active_set_size == 1);
  CHECK(s.loads[1] == 0.0);
  CHECK(1.0 / c.capacity(1) >= s.theta_star);
  CHECK(oracle::grid_search_hybrid(c).loads[1] <= 1e-12);
}

TEST_CASE("hybrid is stable wherever static routing is") {
  const auto c = make_config({{5.0 / 3.0, 0.5}, {1.0 / 3.0, 0.5}}, 0.0);
  for (double lambda : {0.5, 0.7, 0.9, 0.99}) {
    const auto s = solve_hybrid(c.with_arrival_rate(lambda));
    for (double rho : s.loads) CHECK(rho < 1.0);
  }
  CHECK(error_kind([&] { solve_hybrid(c.with_arrival_rate(1.0)); }) == ErrorKind::Unstable);
  CHECK(error_kind([&] { solve_hybrid(c.with_arrival_rate(0.0)); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("proportional bias") {
  const auto c = make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 0.6);
  const auto p = proportional_bias(c);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const auto s = evaluate_hybrid_bias(c, p);
  CHECK(s.loads[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(s.loads[1] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(s.mean_sojourn >= solve_hybrid(c).mean_sojourn);

  CHECK(proportional_bias(make_config({{2.0, 1.0}}, 0.6)) == std::vector<double>{1.0});
  CHECK(error_kind([&] { evaluate_hybrid_bias(c.with_arrival_rate(0.9), {0.3, 0.7}); }) ==
        ErrorKind::Unstable);
}

}  // TEST_SUITE
