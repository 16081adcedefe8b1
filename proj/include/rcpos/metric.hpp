#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "expr.hpp"
#include "sphere.hpp"

namespace rcpos {

/// Where a chart metric may be evaluated and sampled.
struct ChartDomain {
  enum class Kind { Entire, Polydisc, Ball, Shell, Product };
  Kind kind = Kind::Entire;
  double radius = 0.0;  // Polydisc / Ball
  double inner = 0.0;   // Shell: inner < |z| < outer
  double outer = 0.0;
  std::vector<std::pair<int, ChartDomain>> factors;  // Product: (dimension, domain) blocks in order

  static ChartDomain entire() { return {}; }
  static ChartDomain polydisc(double r) { return {Kind::Polydisc, r, 0.0, 0.0, {}}; }
  static ChartDomain ball(double r) { return {Kind::Ball, r, 0.0, 0.0, {}}; }
  static ChartDomain shell(double a, double b) { return {Kind::Shell, 0.0, a, b, {}}; }
  static ChartDomain product(int n1, ChartDomain d1, int n2, ChartDomain d2) {
    ChartDomain d;
    d.kind = Kind::Product;
    d.factors = {{n1, std::move(d1)}, {n2, std::move(d2)}};
    return d;
  }

  bool contains(const CVector& z) const {
    switch (kind) {
      case Kind::Entire: return z.allFinite();
      case Kind::Polydisc:
        for (Eigen::Index k = 0; k < z.size(); ++k)
          if (!(std::abs(z[k]) < radius)) return false;
        return true;
      case Kind::Ball: return z.norm() < radius;
      case Kind::Shell: {
        const double nz = z.norm();
        return nz > inner && nz < outer;
      }
      case Kind::Product: {
        Eigen::Index off = 0;
        for (const auto& [dim, dom] : factors) {
          if (!dom.contains(z.segment(off, dim))) return false;
          off += dim;
        }
        return off == z.size();
      }
    }
    return false;
  }

  /// Random interior point. `box_radius` bounds the coordinates of an entire chart;
  /// bounded domains keep a 10% margin from their boundary.
  CVector sample(int n, Rng& rng, double box_radius = 1.0) const {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto disc = [&](double rad) {
      const double rr = rad * std::sqrt(unif(rng));
      const double th = 2.0 * std::numbers::pi * unif(rng);
      return Complex(rr * std::cos(th), rr * std::sin(th));
    };
    CVector z(n);
    switch (kind) {
      case Kind::Entire:
        for (int k = 0; k < n; ++k) z[k] = disc(box_radius);
        return z;
      case Kind::Polydisc:
        for (int k = 0; k < n; ++k) z[k] = disc(0.9 * radius);
        return z;
      case Kind::Ball: {
        const CVector dir = random_unit_vector(n, rng);
        return dir * (0.9 * radius * std::pow(unif(rng), 1.0 / (2.0 * n)));
      }
      case Kind::Shell: {
        const CVector dir = random_unit_vector(n, rng);
        const double lo = inner + 0.1 * (outer - inner), hi = outer - 0.1 * (outer - inner);
        return dir * (lo + (hi - lo) * unif(rng));
      }
      case Kind::Product: {
        Eigen::Index off = 0;
        for (const auto& [dim, dom] : factors) {
          z.segment(off, dim) = dom.sample(dim, rng, box_radius);
          off += dim;
        }
        return z;
      }
    }
    return z;
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
      case Kind::Entire: os << "entire"; break;
      case Kind::Polydisc: os << "polydisc:" << radius; break;
      case Kind::Ball: os << "ball:" << radius; break;
      case Kind::Shell: os << "shell:" << inner << ":" << outer; break;
      case Kind::Product:
        os << "product(";
        for (std::size_t k = 0; k < factors.size(); ++k)
          os << (k ? "," : "") << factors[k].first << "@" << factors[k].second.to_string();
        os << ")";
        break;
    }
    return os.str();
  }
};

/// Plain-matrix view of a metric jet: value and the three derivative families.
struct MetricJets {
  int n = 0;
  int r = 0;
  CMatrix value;
  std::vector<CMatrix> dz;       // [i]
  std::vector<CMatrix> dzbar;    // [j]
  std::vector<CMatrix> dzdzbar;  // [i * n + j]

  const CMatrix& mixed(int i, int j) const { return dzdzbar[static_cast<std::size_t>(i * n + j)]; }

  static MetricJets from(const JetMatrix& m) {
    MetricJets out;
    out.n = m.vars();
    out.r = m.rows();
    out.value = m.value();
    for (int i = 0; i < out.n; ++i) {
      out.dz.push_back(m.dz(i));
      out.dzbar.push_back(m.dzbar(i));
    }
    for (int i = 0; i < out.n; ++i)
      for (int j = 0; j < out.n; ++j) out.dzdzbar.push_back(m.dzdzbar(i, j));
    return out;
  }

  /// Constant frame change h -> S h S* applied to every jet component.
  MetricJets congruence(const CMatrix& s) const {
    MetricJets out = *this;
    out.r = static_cast<int>(s.rows());
    out.value = s * value * s.adjoint();
    for (auto& d : out.dz) d = s * d * s.adjoint();
    for (auto& d : out.dzbar) d = s * d * s.adjoint();
    for (auto& d : out.dzdzbar) d = s * d * s.adjoint();
    return out;
  }

  /// Jets of the principal sub-block [from, from + size).
  MetricJets block(int from, int size) const {
    MetricJets out;
    out.n = n;
    out.r = size;
    out.value = value.block(from, from, size, size);
    for (const auto& d : dz) out.dz.push_back(d.block(from, from, size, size));
    for (const auto& d : dzbar) out.dzbar.push_back(d.block(from, from, size, size));
    for (const auto& d : dzdzbar) out.dzdzbar.push_back(d.block(from, from, size, size));
    return out;
  }

  double max_abs_derivative() const {
    double m = 0.0;
    for (const auto& d : dz) m = std::max(m, rcpos::max_abs(d));
    for (const auto& d : dzbar) m = std::max(m, rcpos::max_abs(d));
    for (const auto& d : dzdzbar) m = std::max(m, rcpos::max_abs(d));
    return m;
  }
};

struct MetricMetadata {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;
  bool kahler_claimed = false;
  std::string source;  // catalog id or DSL text that reproduces the metric
};

/// Hermitian metric h_{alpha betabar}(z, zbar) on a trivialized rank-r bundle
/// over one chart of dimension n. Entries are expression trees; the Hermitian
/// completion h[b][a] = conj h[a][b] has already been applied.
class MetricField {
 public:
  MetricField(int n, int r, std::vector<ExprPtr> entries, ChartDomain domain, MetricMetadata meta)
      : n_(n), r_(r), entries_(std::move(entries)), domain_(domain), meta_(std::move(meta)) {
    if (n < 1 || r < 1) throw Error(ErrorCode::BadParameter, "metric needs dim >= 1 and rank >= 1");
    if (entries_.size() != static_cast<std::size_t>(r * r)) {
      throw Error(ErrorCode::DimensionMismatch, "metric entry grid has the wrong size");
    }
    for (const auto& e : entries_) {
      if (!e) throw Error(ErrorCode::MissingDiagonal, "metric entry missing");
      if (e->max_coordinate() >= n) {
        throw Error(ErrorCode::BadParameter, "entry references z" + std::to_string(e->max_coordinate() + 1) +
                                                 " but dim=" + std::to_string(n));
      }
    }
  }

  int base_dim() const noexcept { return n_; }
  int rank() const noexcept { return r_; }
  /// Rank equal to dimension is read as a metric on the tangent bundle (g = h).
  bool is_tangent() const noexcept { return n_ == r_; }
  const ChartDomain& domain() const noexcept { return domain_; }
  const MetricMetadata& metadata() const noexcept { return meta_; }
  const ExprPtr& entry(int a, int b) const { return entries_[static_cast<std::size_t>(a * r_ + b)]; }

  void check_point(const CVector& z) const {
    if (z.size() != n_) throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
    if (!domain_.contains(z)) throw Error(ErrorCode::OutOfDomain, "point outside " + domain_.to_string());
  }

  /// Value matrix only, no derivatives and no positivity check.
  CMatrix value(const CVector& z, const Tolerances& tol = default_tolerances()) const {
    check_point(z);
    return raw_value(z, tol);
  }

  /// Value matrix without the domain check (finite-difference stencils may step
  /// marginally outside a bounded chart).
  CMatrix raw_value(const CVector& z, const Tolerances& tol = default_tolerances()) const {
    CMatrix m(r_, r_);
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b) m(a, b) = evaluate_value(*entry(a, b), z, tol);
    return m;
  }

  /// Throws NotHermitian / NotPositiveDefinite if the value at z is not a metric.
  void validate_value(const CMatrix& v, const Tolerances& tol = default_tolerances()) const {
    if (!v.allFinite()) throw Error(ErrorCode::NotPositiveDefinite, "metric value is not finite");
    if (!is_hermitian(v, tol.hermitian)) {
      throw Error(ErrorCode::NotHermitian, "metric value fails Hermitian symmetry (defect " +
                                               std::to_string(hermitian_defect(v)) + ")");
    }
    const auto eig = hermitian_eig(v, tol);
    const double lo = eig.values[0], hi = eig.values[eig.values.size() - 1];
    if (!(hi > 0.0) || !(lo > tol.positive_definite * hi)) {
      throw Error(ErrorCode::NotPositiveDefinite, "metric eigenvalues span [" + std::to_string(lo) + ", " +
                                                      std::to_string(hi) + "]");
    }
  }

  /// Exact jets of every entry at z (forward AD in z and zbar).
  JetMatrix eval_jet(const CVector& z, const Tolerances& tol = default_tolerances()) const {
    check_point(z);
    JetMatrix m(r_, n_);
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b) m(a, b) = evaluate_jet(*entry(a, b), z, tol);
    validate_value(m.value(), tol);
    return m;
  }

  MetricJets jets(const CVector& z, const Tolerances& tol = default_tolerances()) const {
    return MetricJets::from(eval_jet(z, tol));
  }

  /// DSL text that parses back to an equivalent metric.
  std::string to_dsl() const {
    std::ostringstream os;
    os << "metric " << (meta_.name.empty() ? std::string("unnamed") : meta_.name) << " dim=" << n_
       << " rank=" << r_;
    if (domain_.kind != ChartDomain::Kind::Entire) os << " domain=" << domain_.to_string();
    if (meta_.kahler_claimed) os << " kahler=true";
    os << "\n";
    for (int a = 0; a < r_; ++a)
      for (int b = a; b < r_; ++b) os << "h[" << a + 1 << "][" << b + 1 << "] = " << to_string(*entry(a, b)) << "\n";
    return os.str();
  }

 private:
  int n_;
  int r_;
  std::vector<ExprPtr> entries_;
  ChartDomain domain_;
  MetricMetadata meta_;
};

/// Builds a metric from a partially specified entry grid: missing off-diagonal
/// entries are completed by conjugation (or zero), missing diagonal entries are
/// rejected, and doubly specified pairs are checked for Hermitian consistency at
/// five seeded random points.
inline MetricField complete_metric(int n, int r, std::vector<ExprPtr> given, ChartDomain domain,
                                   MetricMetadata meta, const Tolerances& tol = default_tolerances()) {
  if (given.size() != static_cast<std::size_t>(r * r)) given.resize(static_cast<std::size_t>(r * r));
  auto at = [&](int a, int b) -> ExprPtr& { return given[static_cast<std::size_t>(a * r + b)]; };
  std::vector<ExprPtr> out(static_cast<std::size_t>(r * r));
  auto out_at = [&](int a, int b) -> ExprPtr& { return out[static_cast<std::size_t>(a * r + b)]; };
  std::vector<std::pair<int, int>> both;
  for (int a = 0; a < r; ++a) {
    if (!at(a, a)) throw Error(ErrorCode::MissingDiagonal, "h[" + std::to_string(a + 1) + "][" + std::to_string(a + 1) + "] not given");
    out_at(a, a) = at(a, a);
    for (int b = a + 1; b < r; ++b) {
      if (at(a, b) && at(b, a)) {
        out_at(a, b) = at(a, b);
        out_at(b, a) = at(b, a);
        both.emplace_back(a, b);
      } else if (at(a, b)) {
        out_at(a, b) = at(a, b);
        out_at(b, a) = conjugate_expr(at(a, b));
      } else if (at(b, a)) {
        out_at(b, a) = at(b, a);
        out_at(a, b) = conjugate_expr(at(b, a));
      } else {
        out_at(a, b) = ExprNode::make_constant(0.0);
        out_at(b, a) = ExprNode::make_constant(0.0);
      }
    }
  }
  MetricField field(n, r, std::move(out), domain, std::move(meta));
  if (!both.empty()) {
    Rng rng(0x5EEDC0DEULL);
    for (int t = 0; t < 5; ++t) {
      const CVector z = domain.sample(n, rng);
      for (auto [a, b] : both) {
        const Complex x = evaluate_value(*field.entry(a, b), z, tol);
        const Complex y = evaluate_value(*field.entry(b, a), z, tol);
        const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
        if (std::abs(x - std::conj(y)) > 1e-10 * scale && std::abs(x - std::conj(y)) > 1e-14) {
          throw Error(ErrorCode::NonHermitianSpec, "h[" + std::to_string(a + 1) + "][" + std::to_string(b + 1) +
                                                       "] and h[" + std::to_string(b + 1) + "][" +
                                                       std::to_string(a + 1) + "] are not conjugate");
        }
      }
    }
  }
  return field;
}

/// Checks value positivity at `count` seeded random domain points.
inline void validate_metric(const MetricField& m, int count, std::uint64_t seed,
                            const Tolerances& tol = default_tolerances()) {
  Rng rng(seed);
  for (int k = 0; k < count; ++k) m.validate_value(m.value(m.domain().sample(m.base_dim(), rng), tol), tol);
}

/// Wirtinger jets by central differences in the 2n real coordinates, each
/// Richardson-extrapolated once (h and h/2). Exported as a cross-check oracle.
inline MetricJets finite_difference_jets(const MetricField& m, const CVector& z, double step = 1e-4,
                                         const Tolerances& tol = default_tolerances()) {
  const int n = m.base_dim();
  auto f = [&](const CVector& p) { return m.raw_value(p, tol); };
  auto shifted = [&](int var, double h) {
    CVector p = z;
    p[var / 2] += (var % 2 == 0) ? Complex(h, 0.0) : Complex(0.0, h);
    return p;
  };
  auto shifted2 = [&](int v1, double h1, int v2, double h2) {
    CVector p = shifted(v1, h1);
    p[v2 / 2] += (v2 % 2 == 0) ? Complex(h2, 0.0) : Complex(0.0, h2);
    return p;
  };
  const CMatrix f0 = f(z);
  auto first = [&](int var, double h) { return CMatrix((f(shifted(var, h)) - f(shifted(var, -h))) / (2.0 * h)); };
  auto second = [&](int s, int t, double h) -> CMatrix {
    if (s == t) return (f(shifted(s, h)) - 2.0 * f0 + f(shifted(s, -h))) / (h * h);
    return (f(shifted2(s, h, t, h)) - f(shifted2(s, h, t, -h)) - f(shifted2(s, -h, t, h)) + f(shifted2(s, -h, t, -h))) /
           (4.0 * h * h);
  };
  auto rich1 = [&](int var) { return CMatrix((4.0 * first(var, step / 2) - first(var, step)) / 3.0); };
  auto rich2 = [&](int s, int t) { return CMatrix((4.0 * second(s, t, step / 2) - second(s, t, step)) / 3.0); };

  MetricJets out;
  out.n = n;
  out.r = m.rank();
  out.value = f0;
  std::vector<CMatrix> d1;
  for (int v = 0; v < 2 * n; ++v) d1.push_back(rich1(v));
  const Complex I(0.0, 1.0);
  for (int k = 0; k < n; ++k) {
    out.dz.push_back(0.5 * (d1[2 * k] - I * d1[2 * k + 1]));
    out.dzbar.push_back(0.5 * (d1[2 * k] + I * d1[2 * k + 1]));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const CMatrix xx = rich2(2 * i, 2 * j), yy = rich2(2 * i + 1, 2 * j + 1);
      const CMatrix xy = rich2(2 * i, 2 * j + 1), yx = rich2(2 * i + 1, 2 * j);
      out.dzdzbar.push_back(0.25 * (xx + yy + I * (xy - yx)));
    }
  return out;
}

/// Largest AD-vs-finite-difference discrepancy over all derivative blocks,
/// relative to the largest AD value or derivative entry.
inline double jet_fd_discrepancy(const MetricJets& ad, const MetricJets& fd) {
  double err = 0.0;
  double scale = std::max(max_abs(ad.value), ad.max_abs_derivative());
  for (std::size_t i = 0; i < ad.dz.size(); ++i) {
    err = std::max(err, max_abs(CMatrix(ad.dz[i] - fd.dz[i])));
    err = std::max(err, max_abs(CMatrix(ad.dzbar[i] - fd.dzbar[i])));
  }
  for (std::size_t i = 0; i < ad.dzdzbar.size(); ++i) err = std::max(err, max_abs(CMatrix(ad.dzdzbar[i] - fd.dzdzbar[i])));
  return scale > 0.0 ? err / scale : err;
}

}  // namespace rcpos
