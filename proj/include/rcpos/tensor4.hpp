#pragma once

#include <cstddef>
#include <vector>

#include "linalg.hpp"

namespace rcpos {

/// Curvature-shaped tensor R_{i jbar alpha betabar}: i, j run over the n base
/// directions and alpha, beta over the r bundle frame indices.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int n, int r) : n_(n), r_(r), data_(static_cast<std::size_t>(n * n * r * r), Complex{}) {
    if (n < 1 || r < 1) throw Error(ErrorCode::BadParameter, "Tensor4 needs n, r >= 1");
  }

  int base_dim() const noexcept { return n_; }
  int rank() const noexcept { return r_; }

  Complex& operator()(int i, int j, int a, int b) { return data_[index(i, j, a, b)]; }
  const Complex& operator()(int i, int j, int a, int b) const { return data_[index(i, j, a, b)]; }

  /// Bundle endomorphism block for the base pair (i, j): M[a][b] = R_{i jbar a bbar}.
  CMatrix block(int i, int j) const {
    CMatrix m(r_, r_);
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b) m(a, b) = (*this)(i, j, a, b);
    return m;
  }

  void set_block(int i, int j, const CMatrix& m) {
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b) (*this)(i, j, a, b) = m(a, b);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  /// max |R(i,j,a,b) - conj R(j,i,b,a)| relative to max |R|; zero for the zero tensor.
  double conjugate_symmetry_defect() const {
    const double scale = max_abs();
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int a = 0; a < r_; ++a)
          for (int b = 0; b < r_; ++b)
            worst = std::max(worst, std::abs((*this)(i, j, a, b) - std::conj((*this)(j, i, b, a))));
    return worst / scale;
  }

  bool is_conjugate_symmetric(const Tolerances& tol = default_tolerances()) const {
    return conjugate_symmetry_defect() <= tol.tensor_symmetry;
  }

  /// R(v, vbar, a, abar) = sum R_{i jbar alpha betabar} v^i conj(v^j) a^alpha conj(a^beta).
  Complex evaluate(const CVector& v, const CVector& a) const {
    Complex sum{};
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        const Complex vv = v[i] * std::conj(v[j]);
        if (vv == Complex{}) continue;
        for (int al = 0; al < r_; ++al)
          for (int be = 0; be < r_; ++be) sum += (*this)(i, j, al, be) * vv * a[al] * std::conj(a[be]);
      }
    return sum;
  }

  /// Matrix B with u* B u = R(u, ubar, a, abar) for every base vector u.
  CMatrix base_form(const CVector& a) const {
    CMatrix m = CMatrix::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        Complex s{};
        for (int al = 0; al < r_; ++al)
          for (int be = 0; be < r_; ++be) s += (*this)(i, j, al, be) * a[al] * std::conj(a[be]);
        m(j, i) = s;
      }
    return m;
  }

  /// Matrix F with b* F b = R(v, vbar, b, bbar) for every fiber vector b.
  CMatrix fiber_form(const CVector& v) const {
    CMatrix m = CMatrix::Zero(r_, r_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        const Complex vv = v[i] * std::conj(v[j]);
        if (vv == Complex{}) continue;
        for (int al = 0; al < r_; ++al)
          for (int be = 0; be < r_; ++be) m(be, al) += (*this)(i, j, al, be) * vv;
      }
    return m;
  }

  Tensor4 operator-() const {
    Tensor4 t = *this;
    for (auto& x : t.data_) x = -x;
    return t;
  }

  Tensor4& operator*=(double c) {
    for (auto& x : data_) x *= c;
    return *this;
  }

  friend Tensor4 operator-(const Tensor4& x, const Tensor4& y) {
    Tensor4 t = x;
    for (std::size_t k = 0; k < t.data_.size(); ++k) t.data_[k] -= y.data_[k];
    return t;
  }

  const std::vector<Complex>& data() const noexcept { return data_; }

 private:
  std::size_t index(int i, int j, int a, int b) const {
    return ((static_cast<std::size_t>(i) * n_ + j) * r_ + a) * r_ + b;
  }

  int n_ = 0;
  int r_ = 0;
  std::vector<Complex> data_;
};

/// Re-expresses R in new frames. Row k of base_frame (resp. bundle_frame) holds
/// the old-frame components of the k-th new frame vector, so a metric matrix
/// transforms as S h S* and component vectors as v_old = S^T v_new.
inline Tensor4 change_frame(const Tensor4& t, const CMatrix& base_frame, const CMatrix& bundle_frame) {
  const int n = t.base_dim(), r = t.rank();
  if (base_frame.rows() != n || bundle_frame.rows() != r) {
    throw Error(ErrorCode::DimensionMismatch, "frame change has wrong size");
  }
  // bundle indices first: per (i,j) block, S M S*
  Tensor4 mid(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) mid.set_block(i, j, bundle_frame * t.block(i, j) * bundle_frame.adjoint());
  Tensor4 out(n, r);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      CMatrix acc = CMatrix::Zero(r, r);
      for (int i = 0; i < n; ++i) {
        if (base_frame(a, i) == Complex{}) continue;
        for (int j = 0; j < n; ++j) {
          const Complex w = base_frame(a, i) * std::conj(base_frame(b, j));
          if (w == Complex{}) continue;
          acc += w * mid.block(i, j);
        }
      }
      out.set_block(a, b, acc);
    }
  return out;
}

}  // namespace rcpos
