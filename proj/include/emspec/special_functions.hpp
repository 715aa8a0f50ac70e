#pragma once

#include <numbers>

namespace emspec {

struct TheoryConstants {
  static constexpr double gamma_euler = std::numbers::egamma_v<double>;
  /// gamma + ln 2 - 2
  static constexpr double c1 = gamma_euler + std::numbers::ln2_v<double> - 2.0;
  /// pi^2 / 2 - 4
  static constexpr double c2 = std::numbers::pi_v<double> * std::numbers::pi_v<double> / 2.0 - 4.0;
};

/// Digamma function for x > 0. Upward recurrence to x >= 10, then the
/// asymptotic Bernoulli series. Throws std::domain_error for x <= 0.
double digamma(double x);

/// Trigamma function for x > 0, same scheme as digamma.
double trigamma(double x);

}  // namespace emspec
