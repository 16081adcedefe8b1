#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "config.hpp"
#include "error.hpp"

namespace rcpos {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_abs(const CVector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Largest |m - m*| entry, relative to the largest entry of m.
inline double hermitian_defect(const CMatrix& m) {
  const double scale = max_abs(m);
  if (scale == 0.0) return 0.0;
  return max_abs(CMatrix(m - m.adjoint())) / scale;
}

inline bool is_hermitian(const CMatrix& m, double rel_tol) {
  return m.rows() == m.cols() && hermitian_defect(m) <= rel_tol;
}

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // unitary, column k pairs with values[k]
  int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for small Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot a_pq with a diagonal
/// unitary and then applies the classical real Jacobi rotation, so the
/// accumulated transform stays exactly unitary up to rounding. Sweeps stop once
/// the off-diagonal Frobenius norm drops below tol.eig_offdiag * ||m||_F.
inline EigenDecomposition hermitian_eig(const CMatrix& m, const Tolerances& tol = default_tolerances()) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "hermitian_eig needs a square matrix");
  }
  if (!m.allFinite()) throw Error(ErrorCode::NotHermitian, "matrix has non-finite entries");
  if (!is_hermitian(m, tol.hermitian)) {
    throw Error(ErrorCode::NotHermitian,
                "asymmetry " + std::to_string(hermitian_defect(m)) + " exceeds tolerance");
  }
  const Eigen::Index n = m.rows();
  CMatrix a = hermitian_part(m);
  for (Eigen::Index k = 0; k < n; ++k) a(k, k) = a(k, k).real();
  CMatrix v = CMatrix::Identity(n, n);

  const double norm = a.norm();
  int sweep = 0;
  if (norm > 0.0) {
    for (;; ++sweep) {
      double off = 0.0;
      for (Eigen::Index p = 0; p < n; ++p)
        for (Eigen::Index q = 0; q < n; ++q)
          if (p != q) off += std::norm(a(p, q));
      if (std::sqrt(off) <= tol.eig_offdiag * norm) break;
      if (sweep >= tol.eig_max_sweeps) {
        throw Error(ErrorCode::NoConvergence,
                    "Jacobi sweep cap of " + std::to_string(tol.eig_max_sweeps) + " reached");
      }
      for (Eigen::Index p = 0; p + 1 < n; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) {
          const Complex apq = a(p, q);
          const double mag = std::abs(apq);
          if (mag == 0.0) continue;
          const Complex phase_conj = std::conj(apq / mag);
          const double app = a(p, p).real();
          const double aqq = a(q, q).real();
          const double theta = (aqq - app) / (2.0 * mag);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          const Complex upp = c, upq = s, uqp = -s * phase_conj, uqq = c * phase_conj;

          for (Eigen::Index k = 0; k < n; ++k) {
            const Complex akp = a(k, p), akq = a(k, q);
            a(k, p) = akp * upp + akq * uqp;
            a(k, q) = akp * upq + akq * uqq;
          }
          for (Eigen::Index k = 0; k < n; ++k) {
            const Complex apk = a(p, k), aqk = a(q, k);
            a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
            a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
          }
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          a(p, p) = a(p, p).real();
          a(q, q) = a(q, q).real();
          for (Eigen::Index k = 0; k < n; ++k) {
            const Complex vkp = v(k, p), vkq = v(k, q);
            v(k, p) = vkp * upp + vkq * uqp;
            v(k, q) = vkp * upq + vkq * uqq;
          }
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x).real() < a(y, y).real(); });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  out.sweeps = sweep;
  return out;
}

/// Lower-triangular P with P h P* = I (Gram-Schmidt of the frame in order,
/// so span of the first s new frame vectors equals span of the first s old ones).
inline CMatrix orthonormalizing_frame(const CMatrix& h, const Tolerances& tol = default_tolerances()) {
  if (h.rows() != h.cols()) throw Error(ErrorCode::DimensionMismatch, "metric must be square");
  const Eigen::Index r = h.rows();
  CMatrix l = CMatrix::Zero(r, r);
  const double scale = std::max(max_abs(h), 1e-300);
  for (Eigen::Index j = 0; j < r; ++j) {
    Complex d = h(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * std::conj(l(j, k));
    if (!(d.real() > tol.frame_pivot * scale)) {
      throw Error(ErrorCode::FrameDegenerate,
                  "Gram-Schmidt pivot " + std::to_string(d.real()) + " at frame index " + std::to_string(j));
    }
    const double ljj = std::sqrt(d.real());
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < r; ++i) {
      Complex s = h(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l.triangularView<Eigen::Lower>().solve(CMatrix::Identity(r, r));
}

/// Inverse of a Hermitian positive definite matrix; SingularMetric otherwise.
inline CMatrix hermitian_inverse(const CMatrix& h) {
  Eigen::LLT<CMatrix> llt(h);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularMetric, "metric is not positive definite");
  return llt.solve(CMatrix::Identity(h.rows(), h.cols()));
}

/// Eigenvalues of the pencil (m, g) with g positive definite, ascending.
inline EigenDecomposition generalized_hermitian_eig(const CMatrix& m, const CMatrix& g,
                                                    const Tolerances& tol = default_tolerances()) {
  const CMatrix p = orthonormalizing_frame(g, tol);
  CMatrix w = p * m * p.adjoint();
  EigenDecomposition e = hermitian_eig(hermitian_part(w), tol);
  e.vectors = p.adjoint() * e.vectors;  // back to g-unit vectors in the original coordinates
  return e;
}

struct Inertia {
  int positive = 0;
  int zero = 0;
  int negative = 0;
};

/// Sign counts of sorted real eigenvalues; |lambda| <= band * max|lambda| counts as zero.
inline Inertia inertia(const RVector& eigenvalues, double band) {
  const double scale = eigenvalues.size() ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  Inertia out;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    const double l = eigenvalues[k];
    if (std::abs(l) <= band * scale) ++out.zero;
    else if (l > 0.0) ++out.positive;
    else ++out.negative;
  }
  return out;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return std::round(b);
}

}  // namespace rcpos
