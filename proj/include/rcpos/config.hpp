#pragma once

#include <cstddef>

namespace rcpos {

/// Numerical thresholds used across the engine. Every operation that compares
/// against a tolerance takes one of these records (defaulted), so a caller can
/// override any single value without touching the others.
struct Tolerances {
  // linalg-core
  double hermitian = 1e-12;        // relative asymmetry allowed for Hermitian input
  double tensor_symmetry = 1e-10;  // Tensor4 conjugate symmetry, relative
  double unit_norm = 1e-12;
  double eig_offdiag = 1e-13;      // Jacobi stop: off-diagonal Frobenius norm / ||m||
  int eig_max_sweeps = 100;
  double eig_residual = 1e-10;

  // metric-dsl
  double positive_definite = 1e-12;  // min eigenvalue > this * max eigenvalue
  double jet_consistency = 1e-10;
  double singular_value = 1e-14;     // |denominator| below this is singular
  double fd_step = 1e-4;
  double fd_relative = 1e-6;

  // curvature-engine
  double kahler = 1e-8;

  // bundle-algebra
  std::size_t rank_cap = 256;
  double frame_pivot = 1e-10;
  double second_fundamental = 1e-6;
  double gauge = 1e-8;
  double projectivization = 1e-6;

  // positivity-certifier
  double margin = 1e-7;       // inconclusive band, on the ||R||_max = 1 scale
  double zero_band = 1e-9;    // eigenvalue counted as zero if |lambda| <= this * ||m||
  double lemma = 1e-6;        // minimizer relations, relative to ||R||_max
  double semidefinite = 1e-8; // monotonicity forms
  double trace_margin = 1e-8; // trace hypothesis of the exterior/tensor implication
  double grid_agreement = 1e-4;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace rcpos
