#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emspec/ensembles.hpp"

namespace emspec {

/// Thrown when a covariance estimate cannot be used for the minimum-variance
/// solve (singular or indefinite).
class CovarianceError : public std::runtime_error {
 public:
  CovarianceError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  /// Ratio of largest to smallest eigenvalue magnitude; infinite if singular.
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

struct PortfolioModelSpec {
  int n_assets = 100;
  int block_size = 20;
  double block_coeff = 0.5;
  double vol_min = 0.1;
  double vol_max = 0.4;
  std::uint64_t vol_seed = 20240101;
};

/// Model correlation C0, fixed volatilities and Sigma0 = diag(sigma) C0 diag(sigma).
struct PortfolioModel {
  PortfolioModelSpec spec;
  Eigen::MatrixXd model_correlation;
  Eigen::VectorXd volatilities;
  Eigen::MatrixXd model_covariance;
  Eigen::MatrixXd covariance_sqrt;

  int n_assets() const { return static_cast<int>(volatilities.size()); }
};

/// Volatilities are drawn log-uniformly on [vol_min, vol_max] from vol_seed.
PortfolioModel make_portfolio_model(const PortfolioModelSpec& spec);

/// Same, with caller-supplied correlation and volatilities.
PortfolioModel make_portfolio_model(const Eigen::MatrixXd& correlation,
                                    const Eigen::VectorXd& volatilities);

/// w = Sigma^{-1} e / (e^t Sigma^{-1} e) via a Cholesky solve.
/// Throws CovarianceError when Sigma is not positive definite.
Eigen::VectorXd min_variance_weights(const Eigen::MatrixXd& sigma);

/// N x T returns with population covariance Sigma0 (Sigma0^{1/2} times iid normals).
Eigen::MatrixXd simulate_returns(const PortfolioModel& model, int horizon, std::uint64_t seed);

/// Pearson correlation of the rows. Throws std::invalid_argument for a
/// row with zero sample variance.
Eigen::MatrixXd sample_correlation(const Eigen::MatrixXd& returns);

/// sigma_k sigma_l sign(C_kl) |C_kl|^q.
Eigen::MatrixXd power_mapped_covariance(const Eigen::MatrixXd& sample_corr,
                                        const Eigen::VectorXd& volatilities, double q);

/// One estimate evaluated against the true covariance.
struct PortfolioResult {
  int horizon = 0;
  double exponent = 1.0;
  double ratio = 0.0;  // Omega^2 / Omega0^2
  Eigen::VectorXd weights;
};

PortfolioResult evaluate_weights(const PortfolioModel& model, int horizon, double q,
                                 const Eigen::VectorXd& weights);

/// Minimum variance Omega0^2 of the model.
double minimal_variance(const PortfolioModel& model);

/// Omega^2 / Omega0^2 of the equal-weight portfolio.
double homogeneous_ratio(const PortfolioModel& model);

/// Aggregated row of a sweep. mean_ratio is empty where the estimator is
/// undefined (raw sample with T <= N, or any realization singular/indefinite).
struct SweepRow {
  std::string method;  // "sample", "power_map" or "power_map_best"
  int horizon = 0;
  double exponent = 1.0;
  std::optional<double> mean_ratio;
  double stderr_ratio = 0.0;
  double homogeneous_ratio = 0.0;
  int valid_realizations = 0;
  int realizations = 0;
};

struct SweepOptions {
  std::vector<int> horizons;
  std::vector<double> exponents;  // power-map grid, e.g. 1.1, 1.2, ..., 2.4
  int realizations = 100;
  std::uint64_t master_seed = 1;
  int workers = 1;
};

/// Default exponent grid {1.1, 1.2, ..., 2.4}.
std::vector<double> default_exponent_grid();

/// For each T: the raw sample row, one row per exponent, and the best
/// exponent row. Each realization draws one return series used by every method.
std::vector<SweepRow> run_sweep(const PortfolioModel& model, const SweepOptions& options);

}  // namespace emspec
