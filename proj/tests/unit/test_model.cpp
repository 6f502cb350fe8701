#include <doctest.h>

#include "hetjsq/error.hpp"
#include "hetjsq/model.hpp"
#include "support/test_util.hpp"

using namespace hetjsq;
using hetjsq::test::error_kind;
using hetjsq::test::make_config;

TEST_SUITE("model") {

TEST_CASE("two-class config sorts by capacity and derives offered loads") {
  const auto c = make_config({{2.0 / 3.0, 0.5}, {4.0 / 3.0, 0.5}}, 0.5);
  REQUIRE(c.class_count() == 2);
  CHECK(c.capacity(0) == doctest::Approx(4.0 / 3.0));
  CHECK(c.capacity(1) == doctest::Approx(2.0 / 3.0));
  const auto nu = c.offered_loads();
  CHECK(nu[0] == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(nu[1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(c.mean_capacity() == doctest::Approx(1.0));
}

TEST_CASE("homogeneous config") {
  const auto c = make_config({{1.0, 1.0}}, 0.9);
  CHECK(c.offered_load(0) == 0.9);
}

TEST_CASE("offered load is lambda / (mu C) exactly") {
  const auto c = make_config({{3.0, 0.25}, {0.7, 0.75}}, 0.4, 1.7);
  for (std::size_t j = 0; j < c.class_count(); ++j) {
    CHECK(c.offered_load(j) == 0.4 / (1.7 * c.capacity(j)));
  }
}

TEST_CASE("validation errors") {
  SystemConfig raw;
  CHECK(error_kind([&] { validate_config(raw); }) == ErrorKind::EmptyClassList);

  raw.classes = {{1.0, 0.3}, {2.0, 0.3}};
  CHECK(error_kind([&] { validate_config(raw); }) == ErrorKind::FractionsDontSumToOne);

  raw.classes = {{0.0, 0.5}, {2.0, 0.5}};
  CHECK(error_kind([&] { validate_config(raw); }) == ErrorKind::NonPositiveCapacity);

  raw.classes = {{-1.0, 0.5}, {2.0, 0.5}};
  CHECK(error_kind([&] { validate_config(raw); }) == ErrorKind::NonPositiveCapacity);

  raw.classes = {{1.0, 1.0}};
  raw.mu = 0.0;
  CHECK(error_kind([&] { validate_config(raw); }) == ErrorKind::InvalidArgument);

  raw.mu = 1.0;
  raw.arrival_rate = -0.1;
  CHECK(error_kind([&] { validate_config(raw); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("fractions within 1e-9 are renormalized") {
  SystemConfig raw;
  raw.classes = {{1.0, 0.5 + 4e-10}, {2.0, 0.5}};
  const auto c = validate_config(raw);
  CHECK(c.fraction(0) + c.fraction(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.capacity(0) == 2.0);
}

TEST_CASE("duplicate capacities are kept with a warning") {
  SystemConfig raw;
  raw.classes = {{1.0, 0.5}, {1.0, 0.5}};
  std::vector<std::string> warnings;
  const auto c = validate_config(raw, &warnings);
  CHECK(c.class_count() == 2);
  CHECK(warnings.size() == 1);
}

TEST_CASE("tail vectors enforce their invariants") {
  CHECK_NOTHROW(TailVector({1.0, 0.5, 0.25, 0.0}));
  CHECK(error_kind([] { TailVector({0.9, 0.5}); }) == ErrorKind::DomainError);
  CHECK(error_kind([] { TailVector({1.0, 0.5, 0.6}); }) == ErrorKind::DomainError);
  CHECK(error_kind([] { TailVector({1.0, -1e-3}); }) == ErrorKind::DomainError);

  TailVector t({1.0, 0.5, 0.25, 0.125});
  CHECK(t.truncation() == 3);
  CHECK(t.mean_occupancy() == doctest::Approx(0.875));
  CHECK_FALSE(t.within_tolerance());
  CHECK(TailVector({1.0, 0.1, 0.0}).within_tolerance());
}

TEST_CASE("tail family") {
  const auto e = TailFamily::empty(3, 5);
  CHECK(e.classes() == 3);
  CHECK(e.truncation() == 5);
  CHECK(e(2, 0) == 1.0);
  CHECK(e(2, 1) == 0.0);
  CHECK(e.within_tolerance());

  LevelArray a(2, 3, 0.0);
  a(0, 0) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 0.5;
  a(1, 2) = 0.6;
  CHECK(error_kind([&] { TailFamily{a}; }) == ErrorKind::DomainError);
  CHECK_NOTHROW(TailFamily(a, 0.2));
}

}  // TEST_SUITE
