#include "fdrelay/random.hpp"

#include <cmath>
#include <vector>

namespace fdrelay {

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * stream.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  for (auto s : stream) {
    words.push_back(static_cast<std::uint32_t>(s));
    words.push_back(static_cast<std::uint32_t>(s >> 32));
  }
  return std::seed_seq(words.begin(), words.end());
}

}  // namespace

Rng::Rng(std::uint64_t seed) : Rng(seed, {}) {}

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  auto seq = make_seed_seq(seed, stream);
  engine_.seed(seq);
}

double Rng::normal() { return normal_(engine_); }

Complex Rng::complex_normal(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = normal_(engine_);
  const double im = normal_(engine_);
  return {s * re, s * im};
}

CMatrix Rng::complex_normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  CMatrix m(rows, cols);
  // Column-major fill keeps the draw order fixed.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_normal();
  }
  return m;
}

CVector Rng::gaussian_vector(const CMatrix& cov) {
  const CMatrix root = psd_sqrt(cov);
  return root * complex_normal_matrix(cov.rows(), 1);
}

std::uint64_t substream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  auto seq = make_seed_seq(seed, stream);
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace fdrelay
