#include "emspec/special_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace emspec {

namespace {

constexpr double kShift = 10.0;

// B_{2k} for k = 1..8.
constexpr double kBernoulli[] = {1.0 / 6.0,     -1.0 / 30.0,     1.0 / 42.0,  -1.0 / 30.0,
                                 5.0 / 66.0,    -691.0 / 2730.0, 7.0 / 6.0,   -3617.0 / 510.0};

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error(std::string(name) + " is only defined here for finite x > 0");
  }
}

}  // namespace

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  while (x < kShift) {
    shift += 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  double series = 0.0;
  double power = inv2;
  for (int k = 1; k <= 8; ++k) {
    series += kBernoulli[k - 1] / (2.0 * k) * power;
    power *= inv2;
  }
  return std::log(x) - 0.5 / x - series - shift;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double shift = 0.0;
  while (x < kShift) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double power = inv2 * inv;
  for (int k = 1; k <= 8; ++k) {
    series += kBernoulli[k - 1] * power;
    power *= inv2;
  }
  return inv + 0.5 * inv2 + series + shift;
}

}  // namespace emspec
