#pragma once

#include <cstdint>
#include <random>

namespace emspec {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Seed for realization `index` of a run started from `master`.
///
/// Each realization owns an independent engine seeded from this value, so a
/// realization's draws do not depend on which worker runs it or in what order.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

/// Standard normal source with a fixed, platform-independent algorithm.
///
/// Uniforms come from the top 53 bits of std::mt19937_64 (whose output
/// sequence is fixed by the C++ standard); normals are produced in pairs by
/// the Box-Muller transform. std::normal_distribution is avoided because its
/// algorithm differs between standard library implementations.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed);

  double operator()();

  /// Uniform on [0, 1).
  double uniform();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace emspec
