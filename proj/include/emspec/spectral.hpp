#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "emspec/ensembles.hpp"
#include "emspec/powermap.hpp"

namespace emspec {

struct EigenSystem {
  Eigen::VectorXd values;                 // ascending
  std::optional<Eigen::MatrixXd> vectors; // orthonormal columns, same order as values
};

/// Symmetric eigendecomposition (Householder tridiagonalization followed by
/// implicit-shift QR). Throws SolverError if the iteration does not converge.
EigenSystem eigh(const Eigen::MatrixXd& m, bool want_vectors = false);

/// Sorted spectra of C and of its power map, paired by rank.
///
/// The first emerging_count = max(N - T, 0) corrections belong to the
/// eigenvalues that were zero before the deformation.
struct SpectralSplit {
  Eigen::VectorXd base_values;
  Eigen::VectorXd deformed_values;
  Eigen::VectorXd corrections;
  int emerging_count = 0;

  int size() const { return static_cast<int>(corrections.size()); }
  std::span<const double> emerging() const {
    return {corrections.data(), static_cast<std::size_t>(emerging_count)};
  }
  std::span<const double> bulk() const {
    return {corrections.data() + emerging_count,
            static_cast<std::size_t>(size() - emerging_count)};
  }
};

SpectralSplit split_spectrum(const SampleMatrix& c, const Deformation& d);
SpectralSplit split_spectrum(const Eigen::MatrixXd& c, int horizon, const Deformation& d);

/// First and second moment of some set of corrections.
struct MomentPair {
  double first = 0.0;
  double second = 0.0;
};

/// delta m_n for all corrections, for the emerging part and for the bulk,
/// averaged over realizations as mean of (1/N) sum_j (Delta lambda_j)^n.
struct MomentSet {
  MomentPair total;
  MomentPair emerging;
  MomentPair bulk;
  int realizations = 0;
  MomentPair total_error;
  MomentPair emerging_error;
  MomentPair bulk_error;
};

/// Streaming form of empirical_moments; feed splits in realization order.
class MomentAccumulator {
 public:
  void add(const SpectralSplit& split);
  int count() const { return static_cast<int>(emerging_.size()); }
  MomentSet result() const;

 private:
  int n_ = 0;
  int emerging_count_ = -1;
  std::vector<MomentPair> emerging_;
  std::vector<MomentPair> bulk_;
};

/// Throws std::invalid_argument on empty input or mixed (N, T).
MomentSet empirical_moments(std::span<const SpectralSplit> splits);

/// Histogram scaled to a density whose in-range mass equals `normalization`.
struct DensityHistogram {
  std::vector<double> bin_edges;
  std::vector<double> density;
  double normalization = 1.0;
  std::size_t in_range = 0;
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  std::size_t bins() const { return density.size(); }
  double width(std::size_t b) const { return bin_edges[b + 1] - bin_edges[b]; }
  double center(std::size_t b) const { return 0.5 * (bin_edges[b] + bin_edges[b + 1]); }
  double total_mass() const;
};

/// Bins are half-open [lo_b, hi_b) except the last, which includes hi.
DensityHistogram histogram(std::span<const double> values, int bins,
                           std::pair<double, double> range, double normalization);

/// sum_b |h_b - <f>_b| width_b where <f>_b is the midpoint-rule average of f
/// over bin b using `subdivisions` points.
double l1_distance(const DensityHistogram& h, const std::function<double(double)>& f,
                   int subdivisions = 64);

/// Emerging spectra: mean +- 5 standard deviations.
std::pair<double, double> default_emerging_range(std::span<const double> values);
/// Bulk spectra: [0, 1.2 * lambda_plus].
std::pair<double, double> default_bulk_range(double lambda_plus);

/// Fraction of each selected eigenvector's squared norm inside each block.
/// Result is indexed [selected vector][block].
std::vector<std::vector<double>> block_overlap(const Eigen::MatrixXd& vectors,
                                               const std::vector<Block>& blocks,
                                               std::span<const int> indices);

/// Value-based diagnostic for an eigenvalue detached from one end of a set.
///
/// For sorted values v_0 <= ... <= v_{n-1}, compares the gap between an
/// extreme value and its neighbour with the width of the remaining values.
struct EdgeSeparation {
  bool upper = false;  // true if the detached value is the largest
  double gap = 0.0;
  double rest_width = 0.0;
  double ratio() const { return rest_width > 0.0 ? gap / rest_width : 0.0; }
};
EdgeSeparation edge_separation(std::span<const double> values);

}  // namespace emspec
