#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "linalg.hpp"

namespace rcpos {

/// splitmix64 finalizer; used to derive independent per-item seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-mode split: the seed of item `counter` in `stream` depends only on
/// (master, stream, counter), never on evaluation order.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter) {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + counter);
}

using Rng = std::mt19937_64;

/// Unit vector with respect to an optional Hermitian metric (identity if absent).
/// The metric pairs as <u, w> = w* M u, matching the Hermitian forms used elsewhere.
class UnitVector {
 public:
  UnitVector() = default;

  explicit UnitVector(CVector components, std::optional<CMatrix> metric = std::nullopt)
      : v_(std::move(components)), metric_(std::move(metric)) {
    const double nrm = std::sqrt(norm_squared());
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw Error(ErrorCode::BadParameter, "cannot normalize a zero vector");
    v_ /= nrm;
  }

  const CVector& components() const noexcept { return v_; }
  const std::optional<CMatrix>& metric() const noexcept { return metric_; }
  Eigen::Index dim() const noexcept { return v_.size(); }
  Complex operator[](Eigen::Index k) const { return v_[k]; }

  double norm_squared() const {
    if (metric_) return (v_.adjoint() * (*metric_) * v_)(0, 0).real();
    return v_.squaredNorm();
  }

 private:
  CVector v_;
  std::optional<CMatrix> metric_;
};

/// Standard complex Gaussian vector (independent N(0,1) real and imaginary parts).
inline CVector gaussian_vector(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    v[k] = Complex(re, im);
  }
  return v;
}

/// Uniform point of the Euclidean unit sphere in C^dim.
inline CVector random_unit_vector(Eigen::Index dim, Rng& rng) {
  for (;;) {
    CVector v = gaussian_vector(dim, rng);
    const double nrm = v.norm();
    if (nrm > 1e-300) return v / nrm;
  }
}

/// `count` uniform samples of the unit sphere in C^dim; deterministic in `seed`.
inline std::vector<UnitVector> sample_unit_sphere(int dim, int count, std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorCode::BadParameter, "sample_unit_sphere: dim must be >= 1");
  if (count < 1) throw Error(ErrorCode::BadParameter, "sample_unit_sphere: count must be >= 1");
  Rng rng(seed);
  std::vector<UnitVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.emplace_back(random_unit_vector(dim, rng));
  return out;
}

}  // namespace rcpos
