#pragma once

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "jet.hpp"

namespace rcpos {

enum class ExprOp { Constant, Coord, ConjCoord, Add, Sub, Neg, Mul, Div, PowInt, Log, Exp, AbsSq };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// Immutable expression tree over z^k and conj(z^k). Trees are shared freely
/// between metric entries (Hermitian completion reuses subtrees).
struct ExprNode {
  ExprOp op = ExprOp::Constant;
  Complex constant{};
  int index = 0;     // coordinate index (0-based) for Coord / ConjCoord
  int exponent = 0;  // for PowInt
  std::vector<ExprPtr> children;

  static ExprPtr make_constant(Complex c) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Constant;
    n->constant = c;
    return n;
  }
  static ExprPtr make_coord(int k, bool conjugated) {
    auto n = std::make_shared<ExprNode>();
    n->op = conjugated ? ExprOp::ConjCoord : ExprOp::Coord;
    n->index = k;
    return n;
  }
  static ExprPtr make(ExprOp op, std::vector<ExprPtr> kids, int exponent = 0) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->children = std::move(kids);
    n->exponent = exponent;
    return n;
  }

  /// Largest coordinate index referenced, or -1.
  int max_coordinate() const {
    int m = (op == ExprOp::Coord || op == ExprOp::ConjCoord) ? index : -1;
    for (const auto& c : children) m = std::max(m, c->max_coordinate());
    return m;
  }
};

inline ExprPtr operator+(const ExprPtr& a, const ExprPtr& b) { return ExprNode::make(ExprOp::Add, {a, b}); }
inline ExprPtr operator-(const ExprPtr& a, const ExprPtr& b) { return ExprNode::make(ExprOp::Sub, {a, b}); }
inline ExprPtr operator*(const ExprPtr& a, const ExprPtr& b) { return ExprNode::make(ExprOp::Mul, {a, b}); }
inline ExprPtr operator/(const ExprPtr& a, const ExprPtr& b) { return ExprNode::make(ExprOp::Div, {a, b}); }

/// Tree of the complex conjugate function: z <-> conj(z), constants conjugated.
/// log/exp/pow are holomorphic, so conj(phi(f)) = phi(conj f) off the log branch cut.
inline ExprPtr conjugate_expr(const ExprPtr& e) {
  switch (e->op) {
    case ExprOp::Constant: return ExprNode::make_constant(std::conj(e->constant));
    case ExprOp::Coord: return ExprNode::make_coord(e->index, true);
    case ExprOp::ConjCoord: return ExprNode::make_coord(e->index, false);
    case ExprOp::AbsSq: return e;
    default: {
      std::vector<ExprPtr> kids;
      kids.reserve(e->children.size());
      for (const auto& c : e->children) kids.push_back(conjugate_expr(c));
      return ExprNode::make(e->op, std::move(kids), e->exponent);
    }
  }
}

/// Plain complex evaluation (z^k and conj(z^k) tied together). Used by the
/// finite-difference oracle and by consistency checks.
inline Complex evaluate_value(const ExprNode& e, const CVector& z, const Tolerances& tol = default_tolerances()) {
  switch (e.op) {
    case ExprOp::Constant: return e.constant;
    case ExprOp::Coord: return z[e.index];
    case ExprOp::ConjCoord: return std::conj(z[e.index]);
    case ExprOp::Add: return evaluate_value(*e.children[0], z, tol) + evaluate_value(*e.children[1], z, tol);
    case ExprOp::Sub: return evaluate_value(*e.children[0], z, tol) - evaluate_value(*e.children[1], z, tol);
    case ExprOp::Neg: return -evaluate_value(*e.children[0], z, tol);
    case ExprOp::Mul: return evaluate_value(*e.children[0], z, tol) * evaluate_value(*e.children[1], z, tol);
    case ExprOp::Div: {
      const Complex d = evaluate_value(*e.children[1], z, tol);
      require_nonsingular(d, tol, "division by");
      return evaluate_value(*e.children[0], z, tol) / d;
    }
    case ExprOp::PowInt: {
      const Complex b = evaluate_value(*e.children[0], z, tol);
      if (e.exponent < 0) require_nonsingular(b, tol, "negative power");
      Complex r = 1.0;
      for (int k = 0; k < std::abs(e.exponent); ++k) r *= b;
      return e.exponent < 0 ? 1.0 / r : r;
    }
    case ExprOp::Log: {
      const Complex a = evaluate_value(*e.children[0], z, tol);
      require_nonsingular(a, tol, "log");
      return std::log(a);
    }
    case ExprOp::Exp: return std::exp(evaluate_value(*e.children[0], z, tol));
    case ExprOp::AbsSq: return std::norm(evaluate_value(*e.children[0], z, tol));
  }
  return {};
}

/// Exact Wirtinger jet of the expression at z.
inline WirtingerJet evaluate_jet(const ExprNode& e, const CVector& z, const Tolerances& tol = default_tolerances()) {
  const int n = static_cast<int>(z.size());
  switch (e.op) {
    case ExprOp::Constant: return WirtingerJet::constant(n, e.constant);
    case ExprOp::Coord: return WirtingerJet::coordinate(n, e.index, z[e.index]);
    case ExprOp::ConjCoord: return WirtingerJet::conj_coordinate(n, e.index, z[e.index]);
    case ExprOp::Add: return evaluate_jet(*e.children[0], z, tol) + evaluate_jet(*e.children[1], z, tol);
    case ExprOp::Sub: return evaluate_jet(*e.children[0], z, tol) - evaluate_jet(*e.children[1], z, tol);
    case ExprOp::Neg: return -evaluate_jet(*e.children[0], z, tol);
    case ExprOp::Mul: return evaluate_jet(*e.children[0], z, tol) * evaluate_jet(*e.children[1], z, tol);
    case ExprOp::Div:
      return evaluate_jet(*e.children[0], z, tol) * reciprocal(evaluate_jet(*e.children[1], z, tol), tol);
    case ExprOp::PowInt: return pow(evaluate_jet(*e.children[0], z, tol), e.exponent, tol);
    case ExprOp::Log: return log(evaluate_jet(*e.children[0], z, tol), tol);
    case ExprOp::Exp: return exp(evaluate_jet(*e.children[0], z, tol));
    case ExprOp::AbsSq: return absq(evaluate_jet(*e.children[0], z, tol));
  }
  return WirtingerJet(n);
}

namespace detail {

inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

inline int precedence(ExprOp op) {
  switch (op) {
    case ExprOp::Add:
    case ExprOp::Sub: return 1;
    case ExprOp::Mul:
    case ExprOp::Div: return 2;
    case ExprOp::Neg: return 3;
    case ExprOp::PowInt: return 4;
    default: return 5;
  }
}

}  // namespace detail

/// Prints the expression in DSL syntax; parse(print(e)) evaluates identically.
inline std::string to_string(const ExprNode& e) {
  using detail::precedence;
  auto wrap = [](const ExprNode& child, int min_prec) {
    std::string s = to_string(child);
    return precedence(child.op) < min_prec ? "(" + s + ")" : s;
  };
  switch (e.op) {
    case ExprOp::Constant: {
      const double re = e.constant.real(), im = e.constant.imag();
      if (im == 0.0) return re < 0.0 || std::signbit(re) ? "(" + detail::format_real(re) + ")" : detail::format_real(re);
      if (re == 0.0) return "(" + detail::format_real(im) + "*i)";
      return "(" + detail::format_real(re) + "+" + detail::format_real(im) + "*i)";
    }
    case ExprOp::Coord: return "z" + std::to_string(e.index + 1);
    case ExprOp::ConjCoord: return "conj(z" + std::to_string(e.index + 1) + ")";
    case ExprOp::Add: return wrap(*e.children[0], 1) + " + " + wrap(*e.children[1], 2);
    case ExprOp::Sub: return wrap(*e.children[0], 1) + " - " + wrap(*e.children[1], 2);
    case ExprOp::Mul: return wrap(*e.children[0], 2) + "*" + wrap(*e.children[1], 3);
    case ExprOp::Div: return wrap(*e.children[0], 2) + "/" + wrap(*e.children[1], 3);
    case ExprOp::Neg: return "-" + wrap(*e.children[0], 4);
    case ExprOp::PowInt: return wrap(*e.children[0], 5) + "^" + std::to_string(e.exponent);
    case ExprOp::Log: return "log(" + to_string(*e.children[0]) + ")";
    case ExprOp::Exp: return "exp(" + to_string(*e.children[0]) + ")";
    case ExprOp::AbsSq: return "absq(" + to_string(*e.children[0]) + ")";
  }
  return "";
}

}  // namespace rcpos
