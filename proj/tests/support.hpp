#pragma once

#include <string>
#include <vector>

#include "rcpos/catalog.hpp"
#include "rcpos/parser.hpp"

namespace rcpos::test {

inline const char* const kSffRank2 =
    "metric sff dim=2 rank=2\n"
    "h[1][1] = 1 + absq(z1)\n"
    "h[2][2] = 1 + absq(z2)\n"
    "h[1][2] = z1*conj(z2)\n";

inline const char* const kGriffithsRank2 =
    "metric twisted dim=2 rank=2 domain=polydisc:0.8\n"
    "h[1][1] = (1 + absq(z1) + absq(z2))^-1\n"
    "h[2][2] = (1 + absq(z1) + absq(z2))^-1\n"
    "h[1][2] = 0.1*z1*conj(z2)*(1 + absq(z1) + absq(z2))^-1\n";

/// Rank 2 over a curve: one more shape where base and bundle dimensions differ.
inline const char* const kCurveRank2 =
    "metric curve dim=1 rank=2 domain=ball:1\n"
    "h[1][1] = 1 + absq(z1)\n"
    "h[2][2] = 2 - absq(z1)\n"
    "h[1][2] = 0.5*z1\n";

inline std::vector<CVector> points(const MetricField& m, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CVector> out;
  for (int k = 0; k < count; ++k) out.push_back(m.domain().sample(m.base_dim(), rng));
  return out;
}

inline CMatrix random_hermitian(int n, Rng& rng) {
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gaussian_vector(1, rng)[0];
  return hermitian_part(a);
}

inline CMatrix random_positive(int n, Rng& rng) {
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = gaussian_vector(1, rng)[0];
  return a * a.adjoint() + CMatrix::Identity(n, n);
}

}  // namespace rcpos::test
