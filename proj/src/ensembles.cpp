#include "emspec/ensembles.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "emspec/rng.hpp"

namespace emspec {

namespace {

void require_coeff(double c) {
  if (!(c >= 0.0 && c < 1.0)) {
    throw std::invalid_argument("correlation coefficient must lie in [0, 1), got " +
                                std::to_string(c));
  }
}

PopulationCorrelation finish(PopulationCorrelation xi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xi.matrix);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigensolver failed on population correlation matrix");
  }
  if (es.eigenvalues()(0) <= 0.0) {
    throw std::invalid_argument("population correlation matrix is not positive definite");
  }
  const Eigen::VectorXd root = es.eigenvalues().array().sqrt();
  xi.spectrum = es.eigenvalues();
  xi.sqrt = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  mirror_upper(xi.sqrt);
  return xi;
}

}  // namespace

void EnsembleShape::validate() const {
  if (n_series < 2) throw std::invalid_argument("n_series must be at least 2");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("variance must be positive and finite");
  }
}

void mirror_upper(Eigen::MatrixXd& m) {
  m.triangularView<Eigen::StrictlyLower>() = m.transpose();
}

double rank_tolerance(const Eigen::MatrixXd& c) {
  return 1e-10 * c.diagonal().cwiseAbs().maxCoeff() * static_cast<double>(c.rows());
}

DataMatrix sample_gaussian(const EnsembleShape& shape, std::uint64_t seed) {
  shape.validate();
  DataMatrix out;
  out.shape = shape;
  out.seed = seed;
  out.entries.resize(shape.n_series, shape.horizon);
  GaussianSource normal(seed);
  const double sd = std::sqrt(shape.variance);
  for (int k = 0; k < shape.horizon; ++k) {
    for (int j = 0; j < shape.n_series; ++j) out.entries(j, k) = sd * normal();
  }
  return out;
}

SampleMatrix wishart(const DataMatrix& a) {
  if (!a.entries.allFinite()) throw std::invalid_argument("data matrix has non-finite entries");
  const auto n = a.entries.rows();
  SampleMatrix c;
  c.shape = a.shape;
  c.entries = Eigen::MatrixXd::Zero(n, n);
  c.entries.selfadjointView<Eigen::Upper>().rankUpdate(a.entries, 1.0 / a.shape.horizon);
  mirror_upper(c.entries);
  return c;
}

SampleMatrix cwoe_sample(std::shared_ptr<const PopulationCorrelation> xi,
                         const EnsembleShape& shape, std::uint64_t seed) {
  if (!xi) throw std::invalid_argument("population correlation is null");
  if (xi->dimension() != shape.n_series) {
    throw std::invalid_argument("population dimension " + std::to_string(xi->dimension()) +
                                " does not match n_series " +
                                std::to_string(shape.n_series));
  }
  const DataMatrix b = sample_gaussian(shape, seed);
  if (xi->kind == PopulationKind::identity) {
    SampleMatrix c = wishart(b);
    c.population = std::move(xi);
    return c;
  }
  // xi^{1/2} B B^t xi^{1/2} = (xi^{1/2} B)(xi^{1/2} B)^t
  const Eigen::MatrixXd m = xi->sqrt * b.entries;
  SampleMatrix c;
  c.shape = shape;
  c.entries = Eigen::MatrixXd::Zero(shape.n_series, shape.n_series);
  c.entries.selfadjointView<Eigen::Upper>().rankUpdate(m, 1.0 / shape.horizon);
  mirror_upper(c.entries);
  c.population = std::move(xi);
  return c;
}

PopulationCorrelation build_identity(int n) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  PopulationCorrelation xi;
  xi.kind = PopulationKind::identity;
  xi.blocks = {Block{n, 0.0}};
  xi.matrix = Eigen::MatrixXd::Identity(n, n);
  xi.spectrum = Eigen::VectorXd::Ones(n);
  xi.sqrt = Eigen::MatrixXd::Identity(n, n);
  return xi;
}

PopulationCorrelation build_one_block(int n, double c) {
  require_coeff(c);
  PopulationCorrelation xi = build_block_diagonal({Block{n, c}});
  xi.kind = PopulationKind::one_block;
  xi.coeff = c;
  return xi;
}

PopulationCorrelation build_block_diagonal(const std::vector<Block>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("at least one block is required");
  int n = 0;
  for (const auto& b : blocks) {
    if (b.size < 1) throw std::invalid_argument("block sizes must be at least 1");
    require_coeff(b.coeff);
    n += b.size;
  }
  PopulationCorrelation xi;
  xi.kind = PopulationKind::block_diagonal;
  xi.blocks = blocks;
  xi.matrix = Eigen::MatrixXd::Zero(n, n);
  int offset = 0;
  for (const auto& b : blocks) {
    xi.matrix.block(offset, offset, b.size, b.size).setConstant(b.coeff);
    offset += b.size;
  }
  xi.matrix.diagonal().setOnes();
  return finish(std::move(xi));
}

PopulationCorrelation build_banded(int n, double c) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  require_coeff(c);
  PopulationCorrelation xi;
  xi.kind = PopulationKind::banded;
  xi.coeff = c;
  xi.blocks = {Block{n, c}};
  xi.matrix.resize(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) xi.matrix(j, k) = j == k ? 1.0 : std::pow(c, std::abs(j - k));
  }
  return finish(std::move(xi));
}

Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& xi) {
  if (xi.rows() != xi.cols()) throw std::invalid_argument("matrix_sqrt needs a square matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xi);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed in matrix_sqrt");
  if (es.eigenvalues()(0) <= 0.0) {
    throw std::invalid_argument("matrix_sqrt requires a positive definite matrix");
  }
  const Eigen::VectorXd root = es.eigenvalues().array().sqrt();
  Eigen::MatrixXd s = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  mirror_upper(s);
  return s;
}

Eigen::MatrixXd matrix_sqrt(const PopulationCorrelation& xi) { return xi.sqrt; }

}  // namespace emspec
