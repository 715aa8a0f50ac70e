#include "emspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "emspec/error.hpp"

namespace emspec {

EigenSystem eigh(const Eigen::MatrixXd& m, bool want_vectors) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigh needs a square matrix");
  if (!m.allFinite()) throw std::invalid_argument("eigh input has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      m, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "symmetric eigensolver did not converge (n = " << m.rows()
        << ", max|m| = " << m.cwiseAbs().maxCoeff() << ")";
    throw SolverError(msg.str(), Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>::m_maxIterations,
                      std::nan(""));
  }
  EigenSystem out;
  out.values = es.eigenvalues();
  if (want_vectors) out.vectors = es.eigenvectors();
  return out;
}

SpectralSplit split_spectrum(const SampleMatrix& c, const Deformation& d) {
  return split_spectrum(c.entries, c.shape.horizon, d);
}

SpectralSplit split_spectrum(const Eigen::MatrixXd& c, int horizon, const Deformation& d) {
  SpectralSplit s;
  s.base_values = eigh(c).values;
  s.deformed_values = d.q() == 1.0 ? s.base_values : eigh(power_map(c, d)).values;
  s.corrections = s.deformed_values - s.base_values;
  s.emerging_count = std::max(static_cast<int>(c.rows()) - horizon, 0);
  return s;
}

void MomentAccumulator::add(const SpectralSplit& split) {
  if (emerging_.empty()) {
    n_ = split.size();
    emerging_count_ = split.emerging_count;
  } else if (split.size() != n_ || split.emerging_count != emerging_count_) {
    throw std::invalid_argument("all spectral splits must share (N, T)");
  }
  const double inv_n = 1.0 / n_;
  MomentPair e, b;
  for (double x : split.emerging()) {
    e.first += x;
    e.second += x * x;
  }
  for (double x : split.bulk()) {
    b.first += x;
    b.second += x * x;
  }
  e.first *= inv_n;
  e.second *= inv_n;
  b.first *= inv_n;
  b.second *= inv_n;
  emerging_.push_back(e);
  bulk_.push_back(b);
}

namespace {

struct MeanError {
  double mean = 0.0;
  double error = 0.0;
};

template <typename F>
MeanError mean_and_error(std::size_t count, F value) {
  MeanError out;
  for (std::size_t i = 0; i < count; ++i) out.mean += value(i);
  out.mean /= static_cast<double>(count);
  if (count > 1) {
    double ss = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double d = value(i) - out.mean;
      ss += d * d;
    }
    out.error = std::sqrt(ss / static_cast<double>(count - 1) / static_cast<double>(count));
  }
  return out;
}

}  // namespace

MomentSet MomentAccumulator::result() const {
  if (emerging_.empty()) throw std::invalid_argument("no spectral splits accumulated");
  const std::size_t r = emerging_.size();
  MomentSet m;
  m.realizations = static_cast<int>(r);
  const auto e1 = mean_and_error(r, [&](std::size_t i) { return emerging_[i].first; });
  const auto e2 = mean_and_error(r, [&](std::size_t i) { return emerging_[i].second; });
  const auto b1 = mean_and_error(r, [&](std::size_t i) { return bulk_[i].first; });
  const auto b2 = mean_and_error(r, [&](std::size_t i) { return bulk_[i].second; });
  const auto t1 = mean_and_error(r, [&](std::size_t i) { return emerging_[i].first + bulk_[i].first; });
  const auto t2 = mean_and_error(r, [&](std::size_t i) { return emerging_[i].second + bulk_[i].second; });
  m.emerging = {e1.mean, e2.mean};
  m.bulk = {b1.mean, b2.mean};
  // Defined as the sum so that total = emerging + bulk holds exactly.
  m.total = {e1.mean + b1.mean, e2.mean + b2.mean};
  m.emerging_error = {e1.error, e2.error};
  m.bulk_error = {b1.error, b2.error};
  m.total_error = {t1.error, t2.error};
  return m;
}

MomentSet empirical_moments(std::span<const SpectralSplit> splits) {
  if (splits.empty()) throw std::invalid_argument("empirical_moments needs at least one split");
  MomentAccumulator acc;
  for (const auto& s : splits) acc.add(s);
  return acc.result();
}

double DensityHistogram::total_mass() const {
  double mass = 0.0;
  for (std::size_t b = 0; b < bins(); ++b) mass += density[b] * width(b);
  return mass;
}

DensityHistogram histogram(std::span<const double> values, int bins,
                           std::pair<double, double> range, double normalization) {
  const auto [lo, hi] = range;
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  if (!(lo < hi)) throw std::invalid_argument("histogram range must satisfy lo < hi");
  DensityHistogram h;
  h.normalization = normalization;
  h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  const double step = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.bin_edges[b] = lo + step * b;
  h.bin_edges.back() = hi;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    if (v < lo) {
      ++h.underflow;
    } else if (v > hi) {
      ++h.overflow;
    } else {
      auto b = static_cast<std::size_t>((v - lo) / step);
      if (b >= counts.size()) b = counts.size() - 1;
      // Guard against rounding placing v one bin off near an edge.
      while (b > 0 && v < h.bin_edges[b]) --b;
      while (b + 1 < counts.size() && v >= h.bin_edges[b + 1]) ++b;
      ++counts[b];
      ++h.in_range;
    }
  }
  h.density.assign(counts.size(), 0.0);
  if (h.in_range > 0) {
    for (std::size_t b = 0; b < counts.size(); ++b) {
      h.density[b] = normalization * static_cast<double>(counts[b]) /
                     (static_cast<double>(h.in_range) * h.width(b));
    }
  }
  return h;
}

double l1_distance(const DensityHistogram& h, const std::function<double(double)>& f,
                   int subdivisions) {
  if (subdivisions < 1) throw std::invalid_argument("subdivisions must be positive");
  double l1 = 0.0;
  for (std::size_t b = 0; b < h.bins(); ++b) {
    const double w = h.width(b);
    double avg = 0.0;
    for (int i = 0; i < subdivisions; ++i) avg += f(h.bin_edges[b] + (i + 0.5) * w / subdivisions);
    avg /= subdivisions;
    l1 += std::abs(h.density[b] - avg) * w;
  }
  return l1;
}

std::pair<double, double> default_emerging_range(std::span<const double> values) {
  if (values.empty()) return {-1.0, 1.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) sd = std::max(std::abs(mean), 1.0) * 1e-12 + 1e-300;
  return {mean - 5.0 * sd, mean + 5.0 * sd};
}

std::pair<double, double> default_bulk_range(double lambda_plus) {
  return {0.0, 1.2 * lambda_plus};
}

std::vector<std::vector<double>> block_overlap(const Eigen::MatrixXd& vectors,
                                               const std::vector<Block>& blocks,
                                               std::span<const int> indices) {
  int n = 0;
  for (const auto& b : blocks) n += b.size;
  if (n != vectors.rows()) {
    throw std::invalid_argument("block sizes sum to " + std::to_string(n) + " but vectors have " +
                                std::to_string(vectors.rows()) + " rows");
  }
  std::vector<std::vector<double>> out;
  out.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= vectors.cols()) throw std::invalid_argument("eigenvector index out of range");
    const auto v = vectors.col(idx);
    const double norm2 = v.squaredNorm();
    std::vector<double> fractions;
    fractions.reserve(blocks.size());
    int offset = 0;
    for (const auto& b : blocks) {
      fractions.push_back(v.segment(offset, b.size).squaredNorm() / norm2);
      offset += b.size;
    }
    out.push_back(std::move(fractions));
  }
  return out;
}

EdgeSeparation edge_separation(std::span<const double> values) {
  EdgeSeparation out;
  if (values.size() < 3) return out;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  EdgeSeparation lower{false, v[1] - v[0], v[n - 1] - v[1]};
  EdgeSeparation upper{true, v[n - 1] - v[n - 2], v[n - 2] - v[0]};
  return upper.ratio() >= lower.ratio() ? upper : lower;
}

}  // namespace emspec
