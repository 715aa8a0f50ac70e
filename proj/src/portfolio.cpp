#include "emspec/portfolio.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "emspec/parallel.hpp"
#include "emspec/powermap.hpp"
#include "emspec/rng.hpp"

namespace emspec {

namespace {

double condition_estimate(const Eigen::MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd mags = es.eigenvalues().cwiseAbs();
  const double lo = mags.minCoeff();
  return lo > 0.0 ? mags.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

PortfolioModel make_portfolio_model(const Eigen::MatrixXd& correlation,
                                    const Eigen::VectorXd& volatilities) {
  if (correlation.rows() != correlation.cols() || correlation.rows() != volatilities.size()) {
    throw std::invalid_argument("correlation and volatilities disagree in dimension");
  }
  if ((volatilities.array() <= 0.0).any()) throw std::invalid_argument("volatilities must be positive");
  PortfolioModel m;
  m.model_correlation = correlation;
  m.volatilities = volatilities;
  m.model_covariance = volatilities.asDiagonal() * correlation * volatilities.asDiagonal();
  mirror_upper(m.model_covariance);
  m.covariance_sqrt = matrix_sqrt(m.model_covariance);
  m.spec.n_assets = static_cast<int>(volatilities.size());
  return m;
}

PortfolioModel make_portfolio_model(const PortfolioModelSpec& spec) {
  if (spec.block_size < 1 || spec.n_assets % spec.block_size != 0) {
    throw std::invalid_argument("n_assets must be a positive multiple of block_size");
  }
  if (!(spec.vol_min > 0.0 && spec.vol_min <= spec.vol_max)) {
    throw std::invalid_argument("volatility range must satisfy 0 < vol_min <= vol_max");
  }
  const std::vector<Block> blocks(static_cast<std::size_t>(spec.n_assets / spec.block_size),
                                  Block{spec.block_size, spec.block_coeff});
  const PopulationCorrelation c0 = build_block_diagonal(blocks);
  GaussianSource source(spec.vol_seed);
  Eigen::VectorXd vols(spec.n_assets);
  const double log_lo = std::log(spec.vol_min);
  const double log_hi = std::log(spec.vol_max);
  for (int k = 0; k < spec.n_assets; ++k) vols(k) = std::exp(log_lo + (log_hi - log_lo) * source.uniform());
  PortfolioModel m = make_portfolio_model(c0.matrix, vols);
  m.spec = spec;
  return m;
}

Eigen::VectorXd min_variance_weights(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw std::invalid_argument("covariance must be square and non-empty");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14)) {
    std::ostringstream msg;
    const double cond = condition_estimate(sigma);
    msg << "covariance is singular or indefinite (condition estimate " << cond << ")";
    throw CovarianceError(msg.str(), cond);
  }
  const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(sigma.rows()));
  return x / x.sum();
}

Eigen::MatrixXd simulate_returns(const PortfolioModel& model, int horizon, std::uint64_t seed) {
  if (horizon < 2) throw std::invalid_argument("horizon must be at least 2");
  const DataMatrix z = sample_gaussian({model.n_assets(), horizon, 1.0}, seed);
  return model.covariance_sqrt * z.entries;
}

Eigen::MatrixXd sample_correlation(const Eigen::MatrixXd& returns) {
  const auto n = returns.rows();
  const auto t = returns.cols();
  if (t < 2) throw std::invalid_argument("sample correlation needs at least two observations");
  Eigen::MatrixXd centered = returns.colwise() - returns.rowwise().mean();
  const Eigen::VectorXd norms = centered.rowwise().norm();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(norms(k) > 0.0)) {
      throw std::invalid_argument("row " + std::to_string(k) + " has zero sample variance");
    }
    centered.row(k) /= norms(k);
  }
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(n, n);
  corr.selfadjointView<Eigen::Upper>().rankUpdate(centered);
  mirror_upper(corr);
  corr = corr.cwiseMax(-1.0).cwiseMin(1.0);
  corr.diagonal().setOnes();
  return corr;
}

Eigen::MatrixXd power_mapped_covariance(const Eigen::MatrixXd& sample_corr,
                                        const Eigen::VectorXd& volatilities, double q) {
  if (sample_corr.rows() != volatilities.size()) {
    throw std::invalid_argument("correlation and volatilities disagree in dimension");
  }
  Eigen::MatrixXd cov = power_map(sample_corr, Deformation::from_exponent(q));
  for (Eigen::Index k = 0; k < cov.cols(); ++k) {
    for (Eigen::Index j = 0; j <= k; ++j) cov(j, k) *= volatilities(j) * volatilities(k);
  }
  mirror_upper(cov);
  return cov;
}

double minimal_variance(const PortfolioModel& model) {
  const Eigen::VectorXd w = min_variance_weights(model.model_covariance);
  return w.dot(model.model_covariance * w);
}

PortfolioResult evaluate_weights(const PortfolioModel& model, int horizon, double q,
                                 const Eigen::VectorXd& weights) {
  PortfolioResult r;
  r.horizon = horizon;
  r.exponent = q;
  r.weights = weights;
  r.ratio = weights.dot(model.model_covariance * weights) / minimal_variance(model);
  return r;
}

double homogeneous_ratio(const PortfolioModel& model) {
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(model.n_assets(), 1.0 / model.n_assets());
  return w.dot(model.model_covariance * w) / minimal_variance(model);
}

std::vector<double> default_exponent_grid() {
  std::vector<double> grid;
  for (int i = 11; i <= 24; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<SweepRow> run_sweep(const PortfolioModel& model, const SweepOptions& options) {
  if (options.realizations < 1) throw std::invalid_argument("realizations must be positive");
  const double omega0 = minimal_variance(model);
  const double homogeneous = homogeneous_ratio(model);
  const int n = model.n_assets();
  std::vector<SweepRow> rows;

  for (int horizon : options.horizons) {
    const bool raw_defined = horizon > n;
    const std::uint64_t horizon_seed = substream_seed(options.master_seed, static_cast<std::uint64_t>(horizon));
    // Per realization: raw ratio followed by one ratio per exponent.
    using Ratios = std::vector<std::optional<double>>;
    const auto per_realization = parallel_map(options.realizations, options.workers, [&](int r) {
      Ratios out(options.exponents.size() + 1);
      const Eigen::MatrixXd returns =
          simulate_returns(model, horizon, substream_seed(horizon_seed, static_cast<std::uint64_t>(r)));
      const Eigen::MatrixXd corr = sample_correlation(returns);
      auto ratio_for = [&](double q) -> std::optional<double> {
        try {
          const Eigen::VectorXd w = min_variance_weights(power_mapped_covariance(corr, model.volatilities, q));
          return w.dot(model.model_covariance * w) / omega0;
        } catch (const CovarianceError&) {
          return std::nullopt;
        }
      };
      if (raw_defined) out[0] = ratio_for(1.0);
      for (std::size_t i = 0; i < options.exponents.size(); ++i) out[i + 1] = ratio_for(options.exponents[i]);
      return out;
    });

    auto summarize = [&](const std::string& method, double q, std::size_t column) {
      SweepRow row;
      row.method = method;
      row.horizon = horizon;
      row.exponent = q;
      row.homogeneous_ratio = homogeneous;
      row.realizations = options.realizations;
      std::vector<double> values;
      for (const auto& rr : per_realization) {
        if (rr[column]) values.push_back(*rr[column]);
      }
      row.valid_realizations = static_cast<int>(values.size());
      if (!values.empty() && row.valid_realizations == row.realizations) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= values.size();
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        row.mean_ratio = mean;
        row.stderr_ratio = values.size() > 1 ? std::sqrt(ss / (values.size() - 1) / values.size()) : 0.0;
      }
      return row;
    };

    rows.push_back(summarize("sample", 1.0, 0));
    std::optional<SweepRow> best;
    for (std::size_t i = 0; i < options.exponents.size(); ++i) {
      SweepRow row = summarize("power_map", options.exponents[i], i + 1);
      if (row.mean_ratio && (!best || *row.mean_ratio < *best->mean_ratio)) best = row;
      rows.push_back(row);
    }
    if (best) {
      best->method = "power_map_best";
      rows.push_back(*best);
    } else {
      SweepRow missing;
      missing.method = "power_map_best";
      missing.horizon = horizon;
      missing.homogeneous_ratio = homogeneous;
      missing.realizations = options.realizations;
      rows.push_back(missing);
    }
  }
  return rows;
}

}  // namespace emspec
