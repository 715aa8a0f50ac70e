#include "emspec/powermap.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "emspec/ensembles.hpp"

namespace emspec {

namespace {

template <typename F>
Eigen::MatrixXd map_upper(const Eigen::MatrixXd& c, F f) {
  if (c.rows() != c.cols()) throw std::invalid_argument("power map needs a square matrix");
  Eigen::MatrixXd out(c.rows(), c.cols());
  for (Eigen::Index k = 0; k < c.cols(); ++k) {
    for (Eigen::Index j = 0; j <= k; ++j) out(j, k) = f(c(j, k));
  }
  mirror_upper(out);
  return out;
}

}  // namespace

Deformation Deformation::from_exponent(double q) {
  if (!std::isfinite(q) || q < 1.0) {
    throw std::invalid_argument("exponent below 1 is not supported (q = " + std::to_string(q) + ")");
  }
  return Deformation(q);
}

double power_map_entry(double x, double q) {
  if (x == 0.0) return 0.0;
  const double magnitude = std::pow(std::abs(x), q);
  return x < 0.0 ? -magnitude : magnitude;
}

double linear_response_entry(double x, double alpha) {
  if (x == 0.0) return 0.0;
  return x + 0.5 * alpha * x * std::log(x * x);
}

Eigen::MatrixXd power_map(const Eigen::MatrixXd& c, const Deformation& d) {
  const double q = d.q();
  if (q == 1.0) return c;
  return map_upper(c, [q](double x) { return power_map_entry(x, q); });
}

Eigen::MatrixXd linear_response_map(const Eigen::MatrixXd& c, double alpha) {
  return map_upper(c, [alpha](double x) { return linear_response_entry(x, alpha); });
}

}  // namespace emspec
