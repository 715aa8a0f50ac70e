#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace emspec {

/// Dimensions of an N x T data matrix and the variance of its entries.
struct EnsembleShape {
  int n_series = 2;   // N
  int horizon = 1;    // T
  double variance = 1.0;

  /// T / N.
  double kappa() const { return static_cast<double>(horizon) / n_series; }

  /// Throws std::invalid_argument unless N >= 2, T >= 1 and variance > 0.
  void validate() const;
};

/// An N x T Gaussian data matrix together with the seed that produced it.
struct DataMatrix {
  Eigen::MatrixXd entries;
  EnsembleShape shape;
  std::uint64_t seed = 0;
};

enum class PopulationKind { identity, one_block, block_diagonal, banded };

struct Block {
  int size = 1;
  double coeff = 0.0;
};

/// Nonrandom correlation matrix xi of a correlated Wishart ensemble.
///
/// Built only through the build_* functions below, which guarantee a
/// symmetric, unit-diagonal, positive-definite matrix with its ascending
/// spectrum and symmetric square root filled in.
struct PopulationCorrelation {
  PopulationKind kind = PopulationKind::identity;
  double coeff = 0.0;           // c for one_block and banded
  std::vector<Block> blocks;    // block layout; a single block for one_block
  Eigen::MatrixXd matrix;
  Eigen::VectorXd spectrum;     // ascending
  Eigen::MatrixXd sqrt;

  int dimension() const { return static_cast<int>(matrix.rows()); }
};

/// C = A A^t / T, or xi^{1/2} B B^t xi^{1/2} / T for the correlated ensemble.
struct SampleMatrix {
  Eigen::MatrixXd entries;
  EnsembleShape shape;
  std::shared_ptr<const PopulationCorrelation> population;  // null means identity
};

/// N x T matrix of iid N(0, variance) entries, filled column by column.
DataMatrix sample_gaussian(const EnsembleShape& shape, std::uint64_t seed);

/// Wishart sample C = A A^t / T. Only the upper triangle is computed; the
/// lower triangle is a copy, so the result is exactly symmetric.
SampleMatrix wishart(const DataMatrix& a);

/// Correlated Wishart sample C = xi^{1/2} (B B^t / T) xi^{1/2}.
///
/// Includes the 1/T factor so that the ensemble mean is variance * xi.
SampleMatrix cwoe_sample(std::shared_ptr<const PopulationCorrelation> xi,
                         const EnsembleShape& shape, std::uint64_t seed);

PopulationCorrelation build_identity(int n);

/// xi_jk = delta_jk + (1 - delta_jk) c. Requires 0 <= c < 1.
PopulationCorrelation build_one_block(int n, double c);

/// Block-diagonal xi; each block is one_block(size, coeff), zeros between.
PopulationCorrelation build_block_diagonal(const std::vector<Block>& blocks);

/// xi_jk = c^|j-k|. Requires 0 <= c < 1.
PopulationCorrelation build_banded(int n, double c);

/// Symmetric S with S S = xi, from the spectral decomposition.
/// Throws std::invalid_argument if any eigenvalue is <= 0.
Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& xi);
Eigen::MatrixXd matrix_sqrt(const PopulationCorrelation& xi);

/// Copies the strict upper triangle of m onto its strict lower triangle.
void mirror_upper(Eigen::MatrixXd& m);

/// Rank tolerance for sample matrices: 1e-10 * max|C_jj| * N.
double rank_tolerance(const Eigen::MatrixXd& c);

}  // namespace emspec
