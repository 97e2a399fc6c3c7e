#pragma once

#include "fdrelay/linalg.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fdrelay {

/// Seeded generator for circular complex Gaussian draws.
///
/// Streams are keyed by a root seed plus a list of stream indices (trial,
/// link, purpose, ...), so every work item owns an independent substream and
/// results do not depend on the order in which items are scheduled.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

  /// Real N(0, 1).
  double normal();
  /// Circular CN(0, variance).
  Complex complex_normal(double variance = 1.0);
  /// rows x cols matrix of i.i.d. CN(0, 1) entries.
  CMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols);
  /// Zero-mean circular Gaussian vector with covariance `cov` (PSD).
  CVector gaussian_vector(const CMatrix& cov);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Derives a 64-bit seed for the substream (seed, stream...).
std::uint64_t substream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

}  // namespace fdrelay
