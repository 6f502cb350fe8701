#include <doctest.h>

#include <random>

#include "hetjsq/stability.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace hetjsq;
using hetjsq::test::error_kind;
using hetjsq::test::make_config;

TEST_SUITE("stability") {

TEST_CASE("static limit") {
  CHECK(static_limit(make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 0.0)) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(static_limit(make_config({{5.0 / 3.0, 0.5}, {1.0 / 3.0, 0.5}}, 0.0)) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(static_limit(make_config({{2.0, 1.0}}, 0.0, 3.0)) == 6.0);
}

TEST_CASE("asymptotic SQ(2) limit and binding subset") {
  const auto wide = asymptotic_sq2_limit(make_config({{5.0 / 3.0, 0.5}, {1.0 / 3.0, 0.5}}, 0.0));
  CHECK(wide.rate == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(wide.binding_subset == std::vector<std::size_t>{1});

  const auto narrow = asymptotic_sq2_limit(make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 0.0));
  CHECK(narrow.rate == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(narrow.binding_subset == std::vector<std::size_t>({0, 1}));

  const auto homo = asymptotic_sq2_limit(make_config({{1.0, 1.0}}, 0.0));
  CHECK(homo.rate == 1.0);
  CHECK(homo.binding_subset == std::vector<std::size_t>{0});
}

TEST_CASE("too many classes") {
  SystemConfig raw;
  for (int j = 0; j < 25; ++j) raw.classes.push_back({1.0 + j, 1.0 / 25.0});
  const auto c = validate_config(raw);
  CHECK(error_kind([&] { asymptotic_sq2_limit(c); }) == ErrorKind::TooManyClasses);
  CHECK(error_kind([&] { check_subset_condition(c); }) == ErrorKind::TooManyClasses);
}

TEST_CASE("subset condition examples") {
  auto c = make_config({{5.0 / 3.0, 0.5}, {1.0 / 3.0, 0.5}}, 0.7);
  CHECK_FALSE(check_subset_condition(c));
  CHECK(check_subset_condition(c.with_arrival_rate(0.5)));
  CHECK(check_subset_condition(c.with_arrival_rate(1e-12)));
  // The limit itself is outside the open region.
  CHECK_FALSE(check_subset_condition(c.with_arrival_rate(2.0 / 3.0 + 1e-15)));
}

TEST_CASE("lattice base size follows N* > 2") {
  CHECK(lattice_base_size(make_config({{2.0, 0.5}, {1.0, 0.5}}, 0.0)) == 4);
  CHECK(lattice_base_size(make_config({{2.0, 0.25}, {1.0, 0.75}}, 0.0)) == 4);
  CHECK(lattice_base_size(make_config({{1.0, 1.0}}, 0.0)) == 3);
  CHECK(lattice_base_size(make_config({{3.0, 0.2}, {2.0, 0.3}, {1.0, 0.5}}, 0.0)) == 10);
}

TEST_CASE("class sizes") {
  const auto c = make_config({{2.0, 0.25}, {1.0, 0.75}}, 0.0);
  CHECK(class_sizes(c, 8) == std::vector<std::size_t>({2, 6}));
  CHECK(error_kind([&] { class_sizes(c, 6); }) == ErrorKind::NonIntegerClassSizes);
  CHECK(error_kind([&] { class_sizes(c, 2); }) == ErrorKind::NonIntegerClassSizes);
}

TEST_CASE("finite-N limit examples") {
  const auto c = make_config({{5.0 / 3.0, 0.5}, {1.0 / 3.0, 0.5}}, 0.0);
  CHECK(finite_n_limit(c, 4) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(oracle::finite_n_limit_subsets(c, 4) == doctest::Approx(1.0).epsilon(1e-14));

  const auto h = make_config({{1.0, 1.0}}, 0.0);
  for (std::size_t n : {2u, 3u, 7u, 100u}) {
    CHECK(finite_n_limit(h, n) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(error_kind([&] { finite_n_limit(h, 1); }) == ErrorKind::NTooSmall);
  CHECK(error_kind([&] { finite_n_limit(c, 5); }) == ErrorKind::NonIntegerClassSizes);
}

TEST_CASE("finite-N limit matches subset and count-vector enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    // Fractions on a lattice of 12 so that small farms split cleanly.
    std::uniform_int_distribution<int> parts(1, 5);
    std::uniform_real_distribution<double> cap(0.2, 3.0);
    const int m = 1 + trial % 3;
    std::vector<int> w(m);
    int total = 0;
    for (auto& x : w) total += (x = parts(rng));
    SystemConfig raw;
    for (int j = 0; j < m; ++j) raw.classes.push_back({cap(rng), double(w[j]) / total});
    const auto c = validate_config(raw);
    for (std::size_t k = 1; k * total <= 18; ++k) {
      const std::size_t n = k * total;
      if (n < 2) continue;
      const double fast = finite_n_limit(c, n);
      CHECK(fast == doctest::Approx(oracle::finite_n_limit_subsets(c, n)).epsilon(1e-12));
      CHECK(fast == doctest::Approx(oracle::finite_n_limit_counts(c, n)).epsilon(1e-12));
    }
    for (std::size_t n : {total * 7, total * 23}) {
      CHECK(finite_n_limit(c, n) ==
            doctest::Approx(oracle::finite_n_limit_counts(c, n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("finite-N limits decrease along the lattice toward the asymptotic limit") {
  const auto c = make_config({{5.0 / 3.0, 0.5}, {1.0 / 3.0, 0.5}}, 0.0);
  const std::size_t base = lattice_base_size(c);
  double previous = finite_n_limit(c, base);
  for (std::size_t k = 2; k <= 2500; k *= 2) {
    const double next = finite_n_limit(c, k * base);
    CHECK(next <= previous + 1e-15);
    previous = next;
  }
  CHECK(finite_n_limit(c, 10000) == doctest::Approx(2.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("stability report") {
  const auto c = make_config({{4.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}, 0.0);
  const auto r = stability_report(c, 200);
  CHECK(r.static_limit == doctest::Approx(1.0));
  CHECK(r.asymptotic_sq2_limit == doctest::Approx(1.0));
  REQUIRE(r.finite_n_limit.has_value());
  CHECK(*r.finite_n_limit >= r.asymptotic_sq2_limit - 1e-12);
  CHECK(*r.n_servers == 200);
  CHECK_FALSE(stability_report(c).finite_n_limit.has_value());
}

}  // TEST_SUITE
