#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "curvature.hpp"

namespace rcpos {

struct BundleExpr;
using BundleExprPtr = std::shared_ptr<const BundleExpr>;

/// Symbolic derived bundle over the metric's own bundle E.
struct BundleExpr {
  enum class Kind { Base, Dual, TensorPow, ExtPow, SymPow, Sub, Quot, Det };

  Kind kind = Kind::Base;
  int param = 0;  // k, p or s; for Base, 1 means it was spelled "tangent"
  BundleExprPtr child;

  static BundleExprPtr base(bool tangent = false) {
    return std::make_shared<BundleExpr>(BundleExpr{Kind::Base, tangent ? 1 : 0, nullptr});
  }
  static BundleExprPtr make(Kind k, BundleExprPtr c, int p = 0) {
    return std::make_shared<BundleExpr>(BundleExpr{k, p, std::move(c)});
  }
  static BundleExprPtr dual(BundleExprPtr c) { return make(Kind::Dual, std::move(c)); }
  static BundleExprPtr tensor(BundleExprPtr c, int k) { return make(Kind::TensorPow, std::move(c), k); }
  static BundleExprPtr ext(BundleExprPtr c, int p) { return make(Kind::ExtPow, std::move(c), p); }
  static BundleExprPtr sym(BundleExprPtr c, int p) { return make(Kind::SymPow, std::move(c), p); }
  static BundleExprPtr det(BundleExprPtr c) { return make(Kind::Det, std::move(c)); }
  static BundleExprPtr sub(int s) { return make(Kind::Sub, base(), s); }
  static BundleExprPtr quot(int s) { return make(Kind::Quot, base(), s); }

  bool needs_tangent() const {
    if (kind == Kind::Base) return param == 1;
    return child && child->needs_tangent();
  }

  /// Structural rank over a base bundle of rank r.
  long long rank(int r) const {
    switch (kind) {
      case Kind::Base: return r;
      case Kind::Dual: return child->rank(r);
      case Kind::Det: child->rank(r); return 1;
      case Kind::TensorPow: {
        if (param < 1) throw Error(ErrorCode::BadParameter, "tensor power needs k >= 1");
        const long long c = child->rank(r);
        long long out = 1;
        for (int k = 0; k < param; ++k) {
          out *= c;
          if (out > (1LL << 40)) break;
        }
        return out;
      }
      case Kind::ExtPow: {
        const long long c = child->rank(r);
        if (param < 1 || param > c) throw Error(ErrorCode::BadParameter, "exterior power needs 1 <= p <= rank");
        return static_cast<long long>(binomial(static_cast<int>(c), param));
      }
      case Kind::SymPow: {
        if (param < 1) throw Error(ErrorCode::BadParameter, "symmetric power needs p >= 1");
        const long long c = child->rank(r);
        return static_cast<long long>(binomial(static_cast<int>(c + param - 1), param));
      }
      case Kind::Sub:
      case Kind::Quot:
        if (param < 1 || param >= r) throw Error(ErrorCode::BadIndexSet, "sub/quot index set must be 1..rank-1");
        return kind == Kind::Sub ? param : r - param;
    }
    return r;
  }
};

inline std::string to_string(const BundleExpr& e) {
  using K = BundleExpr::Kind;
  switch (e.kind) {
    case K::Base: return e.param == 1 ? "tangent" : "base";
    case K::Dual: return "dual(" + to_string(*e.child) + ")";
    case K::TensorPow: return "tensor(" + to_string(*e.child) + "," + std::to_string(e.param) + ")";
    case K::ExtPow: return "ext(" + to_string(*e.child) + "," + std::to_string(e.param) + ")";
    case K::SymPow: return "sym(" + to_string(*e.child) + "," + std::to_string(e.param) + ")";
    case K::Det: return "det(" + to_string(*e.child) + ")";
    case K::Sub: return "sub(" + to_string(*e.child) + "," + std::to_string(e.param) + ")";
    case K::Quot: return "quot(" + to_string(*e.child) + "," + std::to_string(e.param) + ")";
  }
  return "?";
}

namespace detail {

class BundleParser {
 public:
  explicit BundleParser(std::string_view s) : s_(s) {}

  BundleExprPtr parse() {
    auto e = expr();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("bundle expression: " + what, 1, static_cast<int>(pos_) + 1);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string ident() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }
  int integer() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an integer");
    return std::stoi(std::string(s_.substr(start, pos_ - start)));
  }

  BundleExprPtr expr() {
    const std::string name = ident();
    using K = BundleExpr::Kind;
    if (name == "tangent") return BundleExpr::base(true);
    if (name == "base") return BundleExpr::base(false);
    expect('(');
    BundleExprPtr out;
    if (name == "dual" || name == "det") {
      auto c = expr();
      out = BundleExpr::make(name == "dual" ? K::Dual : K::Det, c);
    } else if (name == "tensor" || name == "ext" || name == "sym" || name == "sub" || name == "quot") {
      auto c = expr();
      expect(',');
      const int k = integer();
      const K kind = name == "tensor" ? K::TensorPow
                     : name == "ext"  ? K::ExtPow
                     : name == "sym"  ? K::SymPow
                     : name == "sub"  ? K::Sub
                                      : K::Quot;
      if ((kind == K::Sub || kind == K::Quot) && c->kind != K::Base) fail("sub/quot take the base bundle");
      out = BundleExpr::make(kind, c, k);
    } else {
      fail("unknown bundle operation '" + name + "'");
    }
    expect(')');
    return out;
  }
};

inline std::vector<std::vector<int>> combinations(int r, int p) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) c[static_cast<std::size_t>(k)] = k;
  if (p > r) return out;
  while (true) {
    out.push_back(c);
    int k = p - 1;
    while (k >= 0 && c[static_cast<std::size_t>(k)] == r - p + k) --k;
    if (k < 0) break;
    ++c[static_cast<std::size_t>(k)];
    for (int t = k + 1; t < p; ++t) c[static_cast<std::size_t>(t)] = c[static_cast<std::size_t>(t - 1)] + 1;
  }
  return out;
}

/// Derivation extension of the endomorphism x to Lambda^p, lexicographic basis.
inline CMatrix ext_derivation(const CMatrix& x, int p) {
  const int r = static_cast<int>(x.rows());
  const auto basis = combinations(r, p);
  std::map<std::vector<int>, int> index;
  for (std::size_t k = 0; k < basis.size(); ++k) index[basis[k]] = static_cast<int>(k);
  const int m = static_cast<int>(basis.size());
  CMatrix out = CMatrix::Zero(m, m);
  for (int col = 0; col < m; ++col) {
    const auto& I = basis[static_cast<std::size_t>(col)];
    for (int t = 0; t < p; ++t) {
      const int it = I[static_cast<std::size_t>(t)];
      for (int beta = 0; beta < r; ++beta) {
        if (beta != it && std::find(I.begin(), I.end(), beta) != I.end()) continue;
        std::vector<int> J = I;
        J[static_cast<std::size_t>(t)] = beta;
        // moving beta from slot t to its sorted slot passes every index strictly between it and beta
        int passes = 0;
        for (int s = 0; s < p; ++s) {
          if (s == t) continue;
          const int v = I[static_cast<std::size_t>(s)];
          if ((v > std::min(it, beta)) && (v < std::max(it, beta))) ++passes;
        }
        std::sort(J.begin(), J.end());
        const double sign = (passes % 2 == 0) ? 1.0 : -1.0;
        out(index.at(J), col) += sign * x(beta, it);
      }
    }
  }
  return out;
}

/// Derivation extension to the k-th tensor power (Kronecker sum); first factor is the slowest digit.
inline CMatrix tensor_derivation(const CMatrix& x, int k) {
  const int r = static_cast<int>(x.rows());
  long long dim = 1;
  for (int t = 0; t < k; ++t) dim *= r;
  const int m = static_cast<int>(dim);
  CMatrix out = CMatrix::Zero(m, m);
  std::vector<int> place(static_cast<std::size_t>(k));
  for (int t = 0, w = 1; t < k; ++t, w *= r) place[static_cast<std::size_t>(k - 1 - t)] = w;
  for (int col = 0; col < m; ++col)
    for (int t = 0; t < k; ++t) {
      const int w = place[static_cast<std::size_t>(t)];
      const int digit = (col / w) % r;
      for (int beta = 0; beta < r; ++beta) out(col + (beta - digit) * w, col) += x(beta, digit);
    }
  return out;
}

/// Restriction of the Kronecker sum to Sym^p in the orthonormal basis
/// u_m = (sum of words with content m) / sqrt(#words), m a sorted multiset.
inline CMatrix sym_derivation(const CMatrix& x, int p) {
  const int r = static_cast<int>(x.rows());
  std::map<std::vector<int>, int> index;
  std::vector<double> count;
  long long words = 1;
  for (int t = 0; t < p; ++t) words *= r;
  if (words > (1LL << 22)) throw Error(ErrorCode::RankOverflow, "symmetric power word count too large");
  std::vector<int> w(static_cast<std::size_t>(p), 0);
  auto content = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  for (long long c = 0; c < words; ++c) {
    long long rest = c;
    for (int t = p - 1; t >= 0; --t) {
      w[static_cast<std::size_t>(t)] = static_cast<int>(rest % r);
      rest /= r;
    }
    const auto key = content(w);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, 0);
      count.push_back(0.0);
    }
  }
  int k = 0;
  for (auto& kv : index) kv.second = k++;
  std::fill(count.begin(), count.end(), 0.0);
  const int m = static_cast<int>(index.size());
  CMatrix acc = CMatrix::Zero(m, m);
  for (long long c = 0; c < words; ++c) {
    long long rest = c;
    for (int t = p - 1; t >= 0; --t) {
      w[static_cast<std::size_t>(t)] = static_cast<int>(rest % r);
      rest /= r;
    }
    const int col = index.at(content(w));
    count[static_cast<std::size_t>(col)] += 1.0;
    for (int t = 0; t < p; ++t) {
      const int d = w[static_cast<std::size_t>(t)];
      for (int beta = 0; beta < r; ++beta) {
        auto v = w;
        v[static_cast<std::size_t>(t)] = beta;
        acc(index.at(content(v)), col) += x(beta, d);
      }
    }
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) acc(a, b) /= std::sqrt(count[static_cast<std::size_t>(a)] * count[static_cast<std::size_t>(b)]);
  return acc;
}

inline Tensor4 map_blocks(const Tensor4& R, int new_rank, const std::function<CMatrix(const CMatrix&)>& f) {
  const int n = R.base_dim();
  Tensor4 out(n, new_rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.set_block(i, j, f(R.block(i, j)));
  return out;
}

}  // namespace detail

inline BundleExprPtr parse_bundle(std::string_view text) { return detail::BundleParser(text).parse(); }

/// Embeds plain metric jets into jets over `vars` >= n variables (the first n are the base).
inline JetMatrix to_jet_matrix(const MetricJets& j, int vars) {
  if (vars < j.n) throw Error(ErrorCode::DimensionMismatch, "too few jet variables");
  JetMatrix m(j.r, vars);
  for (int a = 0; a < j.r; ++a)
    for (int b = 0; b < j.r; ++b) {
      WirtingerJet& e = m(a, b);
      e.value = j.value(a, b);
      for (int i = 0; i < j.n; ++i) {
        e.dz[i] = j.dz[static_cast<std::size_t>(i)](a, b);
        e.dzbar[i] = j.dzbar[static_cast<std::size_t>(i)](a, b);
        for (int k = 0; k < j.n; ++k) e.dzdzbar(i, k) = j.mixed(i, k)(a, b);
      }
    }
  return m;
}

struct SubQuotient {
  CurvaturePoint ambient;  // R^E in the h-orthonormal flag-adapted frame
  CurvaturePoint sub;
  CurvaturePoint quot;
  double second_fundamental_residual = 0.0;
  double quotient_residual = 0.0;
  CMatrix frame;  // S with S h(p) S* = I; rows are the new frame vectors
};

/// Curvatures of S = span(e_1..e_s) and Q = E/S at one point. Both the direct
/// route (restricted or dual-annihilator metric) and the second fundamental
/// form route are computed; the residuals compare them.
inline SubQuotient sub_quotient_curvature(const MetricJets& jets, int s, const CMatrix& base_metric,
                                          const CVector& point, const Tolerances& tol = default_tolerances()) {
  const int n = jets.n, r = jets.r;
  if (s < 1 || s >= r) throw Error(ErrorCode::BadIndexSet, "sub-bundle must use 1..rank-1 frame vectors");
  SubQuotient out;
  out.frame = orthonormalizing_frame(jets.value, tol);
  const MetricJets hj = jets.congruence(out.frame);
  const Tensor4 RE = chern_curvature_from_jets(hj);
  const CMatrix I = CMatrix::Identity(r, r);

  const MetricJets sj = hj.block(0, s);
  out.sub = make_curvature_point(chern_curvature_from_jets(sj), sj, point, false);
  out.sub.base_metric = base_metric;

  // Q* is the annihilator of S inside E*, spanned by the trailing dual frame vectors.
  const JetMatrix dual = inverse(to_jet_matrix(hj, n), tol).transpose();
  const MetricJets qdj = MetricJets::from(dual.block(s, r - s));
  const Tensor4 RQdual = chern_curvature_from_jets(qdj);
  Tensor4 RQ(n, r - s);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) RQ.set_block(i, j, -RQdual.block(i, j).transpose());
  out.quot.R = RQ;
  out.quot.bundle_metric = CMatrix::Identity(r - s, r - s);
  out.quot.base_metric = base_metric;
  out.quot.point = point;

  out.ambient = make_curvature_point(RE, hj, point, false);
  out.ambient.base_metric = base_metric;
  out.ambient.bundle_metric = I;

  const double scale = std::max({RE.max_abs(), hj.max_abs_derivative(), 1.0});
  double worst_s = 0.0, worst_q = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const CMatrix& di = hj.dz[static_cast<std::size_t>(i)];
      const CMatrix& dj = hj.dzbar[static_cast<std::size_t>(j)];
      for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) {
          Complex sff{};
          for (int g = s; g < r; ++g) sff += di(a, g) * dj(g, b);
          worst_s = std::max(worst_s, std::abs(RE(i, j, a, b) - out.sub.R(i, j, a, b) - sff));
        }
      for (int a = s; a < r; ++a)
        for (int b = s; b < r; ++b) {
          Complex extra{};
          for (int g = 0; g < s; ++g) extra += di(g, b) * dj(a, g);
          worst_q = std::max(worst_q, std::abs(RQ(i, j, a - s, b - s) - RE(i, j, a, b) - extra));
        }
    }
  out.second_fundamental_residual = worst_s / scale;
  out.quotient_residual = worst_q / scale;
  return out;
}

/// Restriction of R to the frame indices [from, from + size).
inline Tensor4 restrict_bundle(const Tensor4& R, int from, int size) {
  return detail::map_blocks(R, size, [&](const CMatrix& m) { return CMatrix(m.block(from, from, size, size)); });
}

/// Curvature of the derived bundle `expr` at one point. Every non-base result
/// is expressed in a frame that is orthonormal for the induced metric.
inline CurvaturePoint derived_curvature(const BundleExpr& expr, const MetricJets& jets, const CMatrix& base_metric,
                                        const CVector& point, const Tolerances& tol = default_tolerances()) {
  using K = BundleExpr::Kind;
  const long long want = expr.rank(jets.r);
  if (want > static_cast<long long>(tol.rank_cap)) throw Error(ErrorCode::RankOverflow, "derived rank exceeds the configured cap");

  if (expr.kind == K::Base) {
    CurvaturePoint cp = make_curvature_point(chern_curvature_from_jets(jets), jets, point, false);
    cp.base_metric = base_metric;
    return cp;
  }
  if (expr.kind == K::Sub || expr.kind == K::Quot) {
    if (expr.child->kind != K::Base) throw Error(ErrorCode::BadIndexSet, "sub/quot apply to the base bundle only");
    SubQuotient sq = sub_quotient_curvature(jets, expr.param, base_metric, point, tol);
    return expr.kind == K::Sub ? sq.sub : sq.quot;
  }

  const CurvaturePoint c = derived_curvature(*expr.child, jets, base_metric, point, tol);
  const int n = c.base_dim();
  const CMatrix Sh = orthonormalizing_frame(c.bundle_metric, tol);
  const Tensor4 R = change_frame(c.R, CMatrix::Identity(n, n), Sh);
  const int r = R.rank();
  const int p = expr.param;

  CurvaturePoint out;
  out.point = point;
  out.base_metric = base_metric;
  switch (expr.kind) {
    case K::Dual:
      out.R = detail::map_blocks(R, r, [](const CMatrix& m) { return CMatrix(-m.transpose()); });
      break;
    case K::Det:
      out.R = detail::map_blocks(R, 1, [](const CMatrix& m) { return CMatrix::Constant(1, 1, m.trace()); });
      break;
    case K::TensorPow:
      out.R = detail::map_blocks(R, static_cast<int>(want), [p](const CMatrix& m) { return detail::tensor_derivation(m, p); });
      break;
    case K::ExtPow:
      out.R = detail::map_blocks(R, static_cast<int>(want), [p](const CMatrix& m) { return detail::ext_derivation(m, p); });
      break;
    case K::SymPow:
      out.R = detail::map_blocks(R, static_cast<int>(want), [p](const CMatrix& m) { return detail::sym_derivation(m, p); });
      break;
    default:
      break;
  }
  if (out.R.rank() != want) throw Error(ErrorCode::RankMismatch, "derived tensor rank disagrees with structural rank");
  out.bundle_metric = CMatrix::Identity(out.R.rank(), out.R.rank());
  return out;
}

/// Convenience overload: derived curvature of a metric's bundle at z.
inline CurvaturePoint derived_curvature(const BundleExpr& expr, const MetricField& m, const CVector& z,
                                        const Tolerances& tol = default_tolerances()) {
  if (expr.needs_tangent() && !m.is_tangent()) {
    throw Error(ErrorCode::RankMismatch, "'tangent' needs a metric with rank == dim");
  }
  const MetricJets jets = m.jets(z, tol);
  const CMatrix g = m.is_tangent() ? jets.value : CMatrix(CMatrix::Identity(m.base_dim(), m.base_dim()));
  return derived_curvature(expr, jets, g, z, tol);
}

struct ProjectivizationPoint {
  CVector z;
  CVector direction;          // a, in the dual coordinates W of the original frame
  CVector chart;              // w in the gauged chart W_last = 1
  CMatrix direct;             // ddbar log(sum h^{a bbar} W_a conj W_b), gauged coordinates
  CMatrix block;              // formula route in the same coordinates
  CMatrix direct_original;    // ddbar log in the original frame's chart
  double residual = 0.0;      // max |direct - block| relative to max(1, |block|)
  double gauge_residual = 0.0;
  Inertia inertia;            // of direct_original
  int base_dim = 0;
  int rank = 0;
};

namespace detail {

/// ddbar log Phi with Phi = W* H^{-1} W, W = (w, 1), in the n + r - 1 joint variables.
inline CMatrix log_phi_hessian(const JetMatrix& H, const CVector& w, int n, const Tolerances& tol) {
  const int r = H.rows();
  const int N = H.vars();
  std::vector<WirtingerJet> W;
  for (int a = 0; a + 1 < r; ++a) W.push_back(WirtingerJet::coordinate(N, n + a, w[a]));
  W.push_back(WirtingerJet::constant(N, 1.0));
  const JetMatrix Hinv = inverse(H, tol);
  WirtingerJet phi(N);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) phi += conj(W[static_cast<std::size_t>(a)]) * Hinv(a, b) * W[static_cast<std::size_t>(b)];
  return log(phi, tol).dzdzbar;
}

inline CMatrix permutation_last(int r, int which) {
  CMatrix P = CMatrix::Zero(r, r);
  int row = 0;
  for (int a = 0; a < r; ++a)
    if (a != which) P(row++, a) = 1.0;
  P(r - 1, which) = 1.0;
  return P;
}

inline int largest_component(const CVector& v) {
  int best = 0;
  for (int a = 1; a < v.size(); ++a)
    if (std::abs(v[a]) > std::abs(v[best])) best = a;
  return best;
}

}  // namespace detail

/// Curvature of the tautological quotient line bundle over P(E*) at (z, [a]).
inline ProjectivizationPoint projectivization_curvature(const MetricJets& jets, const CVector& z, const CVector& a,
                                                        const Tolerances& tol = default_tolerances()) {
  const int n = jets.n, r = jets.r;
  if (a.size() != r) throw Error(ErrorCode::DimensionMismatch, "fiber direction has wrong length");
  if (!(a.norm() > 0.0)) throw Error(ErrorCode::BadParameter, "fiber direction must be nonzero");
  const int N = n + r - 1;
  ProjectivizationPoint out;
  out.z = z;
  out.direction = a;
  out.base_dim = n;
  out.rank = r;

  // original chart: largest coordinate of a moved last and scaled to 1
  {
    const CMatrix P = detail::permutation_last(r, detail::largest_component(a));
    const CVector pa = P * a;
    const CVector w = pa / pa[r - 1];
    out.direct_original = detail::log_phi_hessian(to_jet_matrix(jets.congruence(P), N), w.head(r - 1), n, tol);
    const EigenDecomposition e = hermitian_eig(hermitian_part(out.direct_original), tol);
    out.inertia = inertia(e.values, tol.zero_band);
  }

  // gauge: h(p) = I by a constant frame, then a holomorphic frame killing dh(p)
  const CMatrix S = orthonormalizing_frame(jets.value, tol);
  const CVector sa = S * a;
  const CMatrix P = detail::permutation_last(r, detail::largest_component(sa));
  const CMatrix T = P * S;
  const MetricJets h2 = jets.congruence(T);
  const CVector ta = T * a;
  out.chart = (ta / ta[r - 1]).head(r - 1);

  JetMatrix G = JetMatrix::constant(CMatrix::Identity(r, r), N);
  for (int i = 0; i < n; ++i)
    for (int x = 0; x < r; ++x)
      for (int y = 0; y < r; ++y) G(x, y).dz[i] = -h2.dz[static_cast<std::size_t>(i)](x, y);
  const JetMatrix H2 = to_jet_matrix(h2, N);
  const JetMatrix H3 = G * H2 * G.adjoint();
  double first = 0.0;
  for (int x = 0; x < r; ++x)
    for (int y = 0; y < r; ++y) first = std::max({first, H3(x, y).dz.cwiseAbs().maxCoeff(), H3(x, y).dzbar.cwiseAbs().maxCoeff()});
  out.gauge_residual = first / std::max(1.0, h2.max_abs_derivative());
  if (out.gauge_residual > tol.gauge) throw Error(ErrorCode::GaugeFailure, "normal frame did not remove first derivatives");

  out.direct = detail::log_phi_hessian(H3, out.chart, n, tol);

  // formula route: base block from R in the unitary frame, Fubini-Study block on the fiber chart
  const Tensor4 R2 = chern_curvature_from_jets(h2);
  CVector W(r);
  W.head(r - 1) = out.chart;
  W[r - 1] = 1.0;
  const double a2 = W.squaredNorm();
  out.block = CMatrix::Zero(N, N);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Complex acc{};
      for (int x = 0; x < r; ++x)
        for (int y = 0; y < r; ++y) acc += R2(i, j, x, y) * W[y] * std::conj(W[x]);
      out.block(i, j) = acc / a2;
    }
  for (int A = 0; A + 1 < r; ++A)
    for (int B = 0; B + 1 < r; ++B)
      out.block(n + A, n + B) = ((A == B ? a2 : 0.0) - W[B] * std::conj(W[A])) / (a2 * a2);

  out.residual = max_abs(CMatrix(out.direct - out.block)) / std::max(1.0, max_abs(out.block));
  return out;
}

inline ProjectivizationPoint projectivization_curvature(const MetricField& m, const CVector& z, const CVector& a,
                                                        const Tolerances& tol = default_tolerances()) {
  return projectivization_curvature(m.jets(z, tol), z, a, tol);
}

}  // namespace rcpos
