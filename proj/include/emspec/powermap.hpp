#pragma once

#include <Eigen/Dense>

namespace emspec {

/// Exponent of the power map, q = 1 + alpha with q >= 1.
class Deformation {
 public:
  /// Throws std::invalid_argument for q < 1 or non-finite q.
  static Deformation from_exponent(double q);
  static Deformation from_alpha(double alpha) { return from_exponent(1.0 + alpha); }

  double q() const { return q_; }
  double alpha() const { return q_ - 1.0; }

 private:
  explicit Deformation(double q) : q_(q) {}
  double q_;
};

/// sign(x) |x|^q, with 0 mapped to 0.
double power_map_entry(double x, double q);

/// x + (alpha/2) x ln(x^2), with 0 mapped to 0.
double linear_response_entry(double x, double alpha);

/// Entrywise sign(C_kl) |C_kl|^q. Computed on the upper triangle and mirrored,
/// so symmetric input yields bit-exactly symmetric output.
Eigen::MatrixXd power_map(const Eigen::MatrixXd& c, const Deformation& d);

/// First-order expansion C + (alpha/2) C o ln(C o C) of the power map.
Eigen::MatrixXd linear_response_map(const Eigen::MatrixXd& c, double alpha);

}  // namespace emspec
