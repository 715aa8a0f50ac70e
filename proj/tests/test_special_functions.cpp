#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <doctest.h>

#include "emspec/special_functions.hpp"

using namespace emspec;

TEST_SUITE("special_functions") {

TEST_CASE("constants") {
  CHECK(TheoryConstants::gamma_euler == doctest::Approx(0.5772156649015329).epsilon(1e-15));
  CHECK(TheoryConstants::c1 == doctest::Approx(-0.7296371545385218).epsilon(1e-14));
  CHECK(TheoryConstants::c2 == doctest::Approx(0.9348022005446793).epsilon(1e-14));
}

TEST_CASE("digamma and trigamma against boost") {
  for (double x : {1e-3, 0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 9.99, 10.0, 17.5, 65.0, 257.0, 513.0, 1e5}) {
    CAPTURE(x);
    const double d = boost::math::digamma(x);
    const double t = boost::math::trigamma(x);
    CHECK(std::abs(digamma(x) - d) <= 1e-13 * std::max(1.0, std::abs(d)));
    CHECK(std::abs(trigamma(x) - t) <= 1e-13 * std::max(1.0, std::abs(t)));
  }
}

TEST_CASE("special values") {
  const double g = TheoryConstants::gamma_euler;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(digamma(1.0) + g) < 1e-14);
  CHECK(std::abs(digamma(0.5) + g + 2.0 * std::numbers::ln2) < 1e-14);
  CHECK(std::abs(trigamma(1.0) - pi2 / 6.0) < 1e-13);
  CHECK(std::abs(trigamma(0.5) - pi2 / 2.0) < 1e-13);
}

TEST_CASE("recurrence identities") {
  for (double x = 0.05; x < 40.0; x *= 1.37) {
    CAPTURE(x);
    CHECK(std::abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) <= 1e-12 * std::max(1.0, 1.0 / x));
    CHECK(std::abs(trigamma(x) - trigamma(x + 1.0) - 1.0 / (x * x)) <= 1e-12 * std::max(1.0, 1.0 / (x * x)));
  }
}

TEST_CASE("duplication formula") {
  for (double x : {0.3, 1.0, 2.5, 8.0, 31.0, 200.0}) {
    CAPTURE(x);
    const double lhs = 2.0 * digamma(2.0 * x);
    const double rhs = digamma(x) + digamma(x + 0.5) + 2.0 * std::numbers::ln2;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
  CHECK_THROWS_AS(digamma(-1.5), std::domain_error);
  CHECK_THROWS_AS(trigamma(0.0), std::domain_error);
}

}
