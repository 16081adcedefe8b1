#pragma once

#include <vector>

#include "linalg.hpp"

namespace rcpos {

/// Value of f together with dz_i f, dzbar_j f and dz_i dzbar_j f, where z and
/// zbar are treated as independent variables. The mixed second derivatives are
/// closed under +, *, / and holomorphic composition, so this is an exact
/// forward-mode AD algebra for everything curvature formulas need.
struct WirtingerJet {
  Complex value{};
  CVector dz;
  CVector dzbar;
  CMatrix dzdzbar;  // (i, j) = d^2 f / dz^i dzbar^j

  WirtingerJet() = default;
  explicit WirtingerJet(int n, Complex v = {})
      : value(v), dz(CVector::Zero(n)), dzbar(CVector::Zero(n)), dzdzbar(CMatrix::Zero(n, n)) {}

  int vars() const noexcept { return static_cast<int>(dz.size()); }

  static WirtingerJet constant(int n, Complex c) { return WirtingerJet(n, c); }

  static WirtingerJet coordinate(int n, int k, Complex zk) {
    WirtingerJet j(n, zk);
    j.dz[k] = 1.0;
    return j;
  }

  static WirtingerJet conj_coordinate(int n, int k, Complex zk) {
    WirtingerJet j(n, std::conj(zk));
    j.dzbar[k] = 1.0;
    return j;
  }

  WirtingerJet& operator+=(const WirtingerJet& o) {
    value += o.value;
    dz += o.dz;
    dzbar += o.dzbar;
    dzdzbar += o.dzdzbar;
    return *this;
  }
  WirtingerJet& operator-=(const WirtingerJet& o) {
    value -= o.value;
    dz -= o.dz;
    dzbar -= o.dzbar;
    dzdzbar -= o.dzdzbar;
    return *this;
  }
  WirtingerJet& operator*=(Complex c) {
    value *= c;
    dz *= c;
    dzbar *= c;
    dzdzbar *= c;
    return *this;
  }

  friend WirtingerJet operator+(WirtingerJet a, const WirtingerJet& b) { return a += b; }
  friend WirtingerJet operator-(WirtingerJet a, const WirtingerJet& b) { return a -= b; }
  friend WirtingerJet operator-(WirtingerJet a) { return a *= -1.0; }
  friend WirtingerJet operator*(WirtingerJet a, Complex c) { return a *= c; }
  friend WirtingerJet operator*(Complex c, WirtingerJet a) { return a *= c; }

  friend WirtingerJet operator*(const WirtingerJet& f, const WirtingerJet& g) {
    WirtingerJet h;
    h.value = f.value * g.value;
    h.dz = g.value * f.dz + f.value * g.dz;
    h.dzbar = g.value * f.dzbar + f.value * g.dzbar;
    h.dzdzbar = g.value * f.dzdzbar + f.value * g.dzdzbar + f.dz * g.dzbar.transpose() + g.dz * f.dzbar.transpose();
    return h;
  }

  /// phi(f) for a holomorphic phi, given phi(f), phi'(f), phi''(f).
  WirtingerJet compose(Complex phi, Complex dphi, Complex ddphi) const {
    WirtingerJet h;
    h.value = phi;
    h.dz = dphi * dz;
    h.dzbar = dphi * dzbar;
    h.dzdzbar = dphi * dzdzbar + ddphi * (dz * dzbar.transpose());
    return h;
  }
};

inline WirtingerJet conj(const WirtingerJet& f) {
  WirtingerJet h;
  h.value = std::conj(f.value);
  h.dz = f.dzbar.conjugate();
  h.dzbar = f.dz.conjugate();
  h.dzdzbar = f.dzdzbar.adjoint();
  return h;
}

inline void require_nonsingular(Complex v, const Tolerances& tol, const char* what) {
  if (!(std::abs(v) >= tol.singular_value)) {
    throw Error(ErrorCode::SingularExpression, std::string(what) + " of a value with magnitude " +
                                                   std::to_string(std::abs(v)));
  }
}

inline WirtingerJet reciprocal(const WirtingerJet& f, const Tolerances& tol = default_tolerances()) {
  require_nonsingular(f.value, tol, "division by");
  const Complex inv = 1.0 / f.value;
  return f.compose(inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline WirtingerJet operator/(const WirtingerJet& f, const WirtingerJet& g) { return f * reciprocal(g); }

inline WirtingerJet pow(const WirtingerJet& f, int k, const Tolerances& tol = default_tolerances()) {
  if (k == 0) return WirtingerJet::constant(f.vars(), 1.0);
  if (k < 0) require_nonsingular(f.value, tol, "negative power");
  const Complex v = f.value;
  auto ipow = [](Complex x, int e) {
    Complex r = 1.0;
    const bool neg = e < 0;
    for (int t = 0; t < (neg ? -e : e); ++t) r *= x;
    return neg ? 1.0 / r : r;
  };
  return f.compose(ipow(v, k), static_cast<double>(k) * ipow(v, k - 1),
                   static_cast<double>(k) * static_cast<double>(k - 1) * (k >= 2 || k < 0 ? ipow(v, k - 2) : 0.0));
}

inline WirtingerJet log(const WirtingerJet& f, const Tolerances& tol = default_tolerances()) {
  require_nonsingular(f.value, tol, "log");
  const Complex inv = 1.0 / f.value;
  return f.compose(std::log(f.value), inv, -inv * inv);
}

inline WirtingerJet exp(const WirtingerJet& f) {
  const Complex e = std::exp(f.value);
  return f.compose(e, e, e);
}

inline WirtingerJet absq(const WirtingerJet& f) { return f * conj(f); }

/// Square matrix of jets (metric entries h_{alpha betabar} and their derivatives).
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int rows, int vars) : rows_(rows), vars_(vars), e_(static_cast<std::size_t>(rows * rows), WirtingerJet(vars)) {}

  int rows() const noexcept { return rows_; }
  int vars() const noexcept { return vars_; }

  WirtingerJet& operator()(int a, int b) { return e_[static_cast<std::size_t>(a * rows_ + b)]; }
  const WirtingerJet& operator()(int a, int b) const { return e_[static_cast<std::size_t>(a * rows_ + b)]; }

  CMatrix value() const {
    CMatrix m(rows_, rows_);
    for (int a = 0; a < rows_; ++a)
      for (int b = 0; b < rows_; ++b) m(a, b) = (*this)(a, b).value;
    return m;
  }
  CMatrix dz(int i) const {
    CMatrix m(rows_, rows_);
    for (int a = 0; a < rows_; ++a)
      for (int b = 0; b < rows_; ++b) m(a, b) = (*this)(a, b).dz[i];
    return m;
  }
  CMatrix dzbar(int j) const {
    CMatrix m(rows_, rows_);
    for (int a = 0; a < rows_; ++a)
      for (int b = 0; b < rows_; ++b) m(a, b) = (*this)(a, b).dzbar[j];
    return m;
  }
  CMatrix dzdzbar(int i, int j) const {
    CMatrix m(rows_, rows_);
    for (int a = 0; a < rows_; ++a)
      for (int b = 0; b < rows_; ++b) m(a, b) = (*this)(a, b).dzdzbar(i, j);
    return m;
  }

  /// Constant matrix c with zero derivatives in `vars` variables.
  static JetMatrix constant(const CMatrix& c, int vars) {
    JetMatrix m(static_cast<int>(c.rows()), vars);
    for (int a = 0; a < m.rows_; ++a)
      for (int b = 0; b < m.rows_; ++b) m(a, b).value = c(a, b);
    return m;
  }

  /// Top-left s x s block (or the trailing block when `from` > 0).
  JetMatrix block(int from, int size) const {
    JetMatrix m(size, vars_);
    for (int a = 0; a < size; ++a)
      for (int b = 0; b < size; ++b) m(a, b) = (*this)(from + a, from + b);
    return m;
  }

  JetMatrix transpose() const {
    JetMatrix m(rows_, vars_);
    for (int a = 0; a < rows_; ++a)
      for (int b = 0; b < rows_; ++b) m(a, b) = (*this)(b, a);
    return m;
  }

  /// Entrywise conjugate transpose.
  JetMatrix adjoint() const {
    JetMatrix m(rows_, vars_);
    for (int a = 0; a < rows_; ++a)
      for (int b = 0; b < rows_; ++b) m(a, b) = conj((*this)(b, a));
    return m;
  }

  friend JetMatrix operator*(const JetMatrix& x, const JetMatrix& y) {
    JetMatrix m(x.rows_, x.vars_);
    for (int a = 0; a < x.rows_; ++a)
      for (int b = 0; b < x.rows_; ++b) {
        WirtingerJet s(x.vars_);
        for (int c = 0; c < x.rows_; ++c) s += x(a, c) * y(c, b);
        m(a, b) = s;
      }
    return m;
  }

  /// Congruence with a constant matrix: S X S*.
  JetMatrix congruence(const CMatrix& s) const {
    const int r = static_cast<int>(s.rows());
    JetMatrix m(r, vars_);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        WirtingerJet acc(vars_);
        for (int c = 0; c < rows_; ++c)
          for (int d = 0; d < rows_; ++d) {
            const Complex w = s(a, c) * std::conj(s(b, d));
            if (w != Complex{}) acc += (*this)(c, d) * w;
          }
        m(a, b) = acc;
      }
    return m;
  }

 private:
  int rows_ = 0;
  int vars_ = 0;
  std::vector<WirtingerJet> e_;
};

/// Gauss-Jordan inverse carried out in jet arithmetic, so the derivatives of
/// the inverse come out of the AD algebra rather than a closed-form identity.
inline JetMatrix inverse(const JetMatrix& m, const Tolerances& tol = default_tolerances()) {
  const int r = m.rows();
  JetMatrix a = m;
  JetMatrix inv = JetMatrix::constant(CMatrix::Identity(r, r), m.vars());
  for (int col = 0; col < r; ++col) {
    int piv = col;
    for (int row = col + 1; row < r; ++row)
      if (std::abs(a(row, col).value) > std::abs(a(piv, col).value)) piv = row;
    if (!(std::abs(a(piv, col).value) > tol.singular_value)) {
      throw Error(ErrorCode::SingularMetric, "jet matrix inverse hit a zero pivot");
    }
    if (piv != col) {
      for (int k = 0; k < r; ++k) {
        std::swap(a(piv, k), a(col, k));
        std::swap(inv(piv, k), inv(col, k));
      }
    }
    const WirtingerJet p = reciprocal(a(col, col), tol);
    for (int k = 0; k < r; ++k) {
      a(col, k) = a(col, k) * p;
      inv(col, k) = inv(col, k) * p;
    }
    for (int row = 0; row < r; ++row) {
      if (row == col) continue;
      const WirtingerJet f = a(row, col);
      for (int k = 0; k < r; ++k) {
        a(row, k) -= f * a(col, k);
        inv(row, k) -= f * inv(col, k);
      }
    }
  }
  return inv;
}

}  // namespace rcpos
