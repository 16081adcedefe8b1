#pragma once

#include <charconv>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "parser.hpp"

namespace rcpos {

using CatalogParams = std::vector<std::pair<std::string, std::string>>;

struct CatalogEntryInfo {
  std::string name;
  std::string usage;
  std::string description;
};

inline const std::vector<CatalogEntryInfo>& catalog_entries() {
  static const std::vector<CatalogEntryInfo> entries = {
      {"fubini_study", "fubini_study:<n>", "Fubini-Study metric on the affine chart of P^n (Kahler, entire chart)"},
      {"flat", "flat:<n>", "Euclidean metric on C^n"},
      {"poincare_disc", "poincare_disc:<n>", "Bergman/Poincare metric on the unit ball of C^n (Kahler, ball chart)"},
      {"product", "product(<id>,<id>)", "block-diagonal product of two catalog metrics"},
      {"hopf", "hopf:<n>", "delta_ij/|z|^2 on the shell 1/2 < |z| < 2 (non-Kahler Hopf metric)"},
      {"conformal", "conformal(<id>,<expr>)", "catalog metric multiplied by a positive factor expression"},
      {"fs_perturbed", "fs_perturbed:<n>:<eps>", "Fubini-Study plus eps*|z|^2*delta_ij (Kahler-breaking for eps > 0)"},
  };
  return entries;
}

namespace detail {

inline std::string param(const CatalogParams& p, const std::string& key) {
  for (const auto& [k, v] : p)
    if (k == key) return v;
  throw Error(ErrorCode::BadParameter, "missing catalog parameter '" + key + "'");
}

inline int int_param(const CatalogParams& p, const std::string& key) {
  const std::string v = param(p, key);
  int x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw Error(ErrorCode::BadParameter, key + " must be an integer");
  if (x < 1) throw Error(ErrorCode::BadParameter, key + " must be >= 1");
  return x;
}

inline double real_param(const CatalogParams& p, const std::string& key) {
  const std::string v = param(p, key);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) {
    throw Error(ErrorCode::BadParameter, key + " must be a finite number");
  }
  return x;
}

/// "(1 + absq(z1) + ... )" style sums.
inline std::string norm_sq_sum(int n, std::string_view lead, char sign) {
  std::string s = "(" + std::string(lead);
  for (int k = 1; k <= n; ++k) s += std::string(" ") + sign + " absq(z" + std::to_string(k) + ")";
  return s + ")";
}

inline ExprPtr shift_coordinates(const ExprPtr& e, int offset) {
  if (e->op == ExprOp::Coord || e->op == ExprOp::ConjCoord) return ExprNode::make_coord(e->index + offset, e->op == ExprOp::ConjCoord);
  if (e->children.empty()) return e;
  std::vector<ExprPtr> kids;
  for (const auto& c : e->children) kids.push_back(shift_coordinates(c, offset));
  return ExprNode::make(e->op, std::move(kids), e->exponent);
}

inline std::string header(const std::string& name, int n, const std::string& domain, bool kahler) {
  return "metric " + name + " dim=" + std::to_string(n) + " rank=" + std::to_string(n) +
         (domain.empty() ? "" : " domain=" + domain) + (kahler ? " kahler=true" : "") + "\n";
}

inline std::string entry(int a, int b, const std::string& expr) {
  return "h[" + std::to_string(a) + "][" + std::to_string(b) + "] = " + expr + "\n";
}

}  // namespace detail

inline MetricField catalog_from_id(std::string_view id, const Tolerances& tol = default_tolerances());

/// Built-in chart metrics on tangent bundles (rank = dim).
inline MetricField catalog(const std::string& name, const CatalogParams& params,
                           const Tolerances& tol = default_tolerances()) {
  using namespace detail;
  std::string src;
  std::string id;
  if (name == "fubini_study" || name == "fs_perturbed") {
    const int n = int_param(params, "n");
    double eps = 0.0;
    if (name == "fs_perturbed") {
      eps = real_param(params, "eps");
      if (eps < 0.0) throw Error(ErrorCode::BadParameter, "fs_perturbed: eps < 0 loses positivity for large |z| on the entire chart");
    }
    const std::string s = norm_sq_sum(n, "1", '+');
    const std::string pert = eps != 0.0 ? " + " + detail::format_real(eps) + "*" + norm_sq_sum(n, "0", '+') : "";
    src = header(name, n, "", eps == 0.0);
    for (int i = 1; i <= n; ++i) {
      src += entry(i, i, s + "^-1 - absq(z" + std::to_string(i) + ")*" + s + "^-2" + pert);
      for (int j = i + 1; j <= n; ++j)
        src += entry(i, j, "-conj(z" + std::to_string(i) + ")*z" + std::to_string(j) + "*" + s + "^-2");
    }
    id = name == "fubini_study" ? "fubini_study:" + std::to_string(n)
                                : "fs_perturbed:" + std::to_string(n) + ":" + param(params, "eps");
  } else if (name == "flat") {
    const int n = int_param(params, "n");
    src = header(name, n, "", true);
    for (int i = 1; i <= n; ++i) src += entry(i, i, "1");
    id = "flat:" + std::to_string(n);
  } else if (name == "poincare_disc") {
    const int n = int_param(params, "n");
    const std::string p = norm_sq_sum(n, "1", '-');
    src = header(name, n, "ball:1", true);
    for (int i = 1; i <= n; ++i) {
      src += entry(i, i, p + "^-1 + absq(z" + std::to_string(i) + ")*" + p + "^-2");
      for (int j = i + 1; j <= n; ++j)
        src += entry(i, j, "conj(z" + std::to_string(i) + ")*z" + std::to_string(j) + "*" + p + "^-2");
    }
    id = "poincare_disc:" + std::to_string(n);
  } else if (name == "hopf") {
    const int n = int_param(params, "n");
    const std::string q = norm_sq_sum(n, "0", '+');
    src = header(name, n, "shell:0.5:2", false);
    for (int i = 1; i <= n; ++i) src += entry(i, i, q + "^-1");
    id = "hopf:" + std::to_string(n);
  } else if (name == "product") {
    const MetricField m1 = catalog_from_id(param(params, "m1"), tol);
    const MetricField m2 = catalog_from_id(param(params, "m2"), tol);
    const int n1 = m1.base_dim(), n2 = m2.base_dim(), r1 = m1.rank(), r2 = m2.rank();
    const int r = r1 + r2;
    std::vector<ExprPtr> entries(static_cast<std::size_t>(r * r), ExprNode::make_constant(0.0));
    for (int a = 0; a < r1; ++a)
      for (int b = 0; b < r1; ++b) entries[static_cast<std::size_t>(a * r + b)] = m1.entry(a, b);
    for (int a = 0; a < r2; ++a)
      for (int b = 0; b < r2; ++b)
        entries[static_cast<std::size_t>((r1 + a) * r + r1 + b)] = shift_coordinates(m2.entry(a, b), n1);
    MetricMetadata meta;
    meta.name = "product";
    meta.params = params;
    meta.kahler_claimed = m1.metadata().kahler_claimed && m2.metadata().kahler_claimed;
    meta.source = "product(" + m1.metadata().source + "," + m2.metadata().source + ")";
    return MetricField(n1 + n2, r, std::move(entries), ChartDomain::product(n1, m1.domain(), n2, m2.domain()), meta);
  } else if (name == "conformal") {
    const MetricField base = catalog_from_id(param(params, "base"), tol);
    const std::string factor_text = param(params, "factor");
    const ExprPtr factor = parse_expression(factor_text, base.base_dim());
    const int r = base.rank();
    std::vector<ExprPtr> entries;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) entries.push_back(factor * base.entry(a, b));
    MetricMetadata meta;
    meta.name = "conformal";
    meta.params = params;
    meta.kahler_claimed = false;
    meta.source = "conformal(" + base.metadata().source + "," + factor_text + ")";
    MetricField m(base.base_dim(), r, std::move(entries), base.domain(), meta);
    try {
      validate_metric(m, 20, 0xC0FFEEULL, tol);
    } catch (const Error& e) {
      throw Error(ErrorCode::BadParameter, "conformal factor does not give a metric: " + std::string(e.what()));
    }
    return m;
  } else {
    throw Error(ErrorCode::UnknownCatalogEntry, "no catalog metric named '" + name + "'");
  }

  MetricField parsed = parse_metric(src, tol);
  MetricMetadata meta = parsed.metadata();
  meta.params = params;
  meta.source = id;
  MetricField m(parsed.base_dim(), parsed.rank(),
                [&] {
                  std::vector<ExprPtr> e;
                  for (int a = 0; a < parsed.rank(); ++a)
                    for (int b = 0; b < parsed.rank(); ++b) e.push_back(parsed.entry(a, b));
                  return e;
                }(),
                parsed.domain(), meta);
  return m;
}

/// Parses catalog identifiers such as `fubini_study:2`, `fs_perturbed:2:0.05`,
/// `product(fubini_study:1,flat:1)` or `conformal(flat:2,1 + absq(z1))`.
inline MetricField catalog_from_id(std::string_view id, const Tolerances& tol) {
  id = detail::trim(id);
  const auto paren = id.find('(');
  if (paren != std::string_view::npos) {
    if (id.back() != ')') throw Error(ErrorCode::BadParameter, "unbalanced parentheses in '" + std::string(id) + "'");
    const std::string name(detail::trim(id.substr(0, paren)));
    const std::string_view inner = id.substr(paren + 1, id.size() - paren - 2);
    int depth = 0;
    std::size_t split = std::string_view::npos;
    for (std::size_t k = 0; k < inner.size(); ++k) {
      if (inner[k] == '(') ++depth;
      else if (inner[k] == ')') --depth;
      else if (inner[k] == ',' && depth == 0) {
        split = k;
        break;
      }
    }
    if (split == std::string_view::npos) throw Error(ErrorCode::BadParameter, name + " needs two comma-separated arguments");
    const std::string first(detail::trim(inner.substr(0, split)));
    const std::string second(detail::trim(inner.substr(split + 1)));
    if (name == "product") return catalog(name, {{"m1", first}, {"m2", second}}, tol);
    if (name == "conformal") return catalog(name, {{"base", first}, {"factor", second}}, tol);
    throw Error(ErrorCode::UnknownCatalogEntry, "no composite catalog metric named '" + name + "'");
  }
  std::vector<std::string> parts;
  std::size_t from = 0;
  for (std::size_t k = 0; k <= id.size(); ++k)
    if (k == id.size() || id[k] == ':') {
      parts.emplace_back(id.substr(from, k - from));
      from = k + 1;
    }
  const std::string& name = parts[0];
  if (name == "fs_perturbed") {
    if (parts.size() != 3) throw Error(ErrorCode::BadParameter, "usage: fs_perturbed:<n>:<eps>");
    return catalog(name, {{"n", parts[1]}, {"eps", parts[2]}}, tol);
  }
  if (name == "fubini_study" || name == "flat" || name == "poincare_disc" || name == "hopf") {
    if (parts.size() != 2) throw Error(ErrorCode::BadParameter, "usage: " + name + ":<n>");
    return catalog(name, {{"n", parts[1]}}, tol);
  }
  throw Error(ErrorCode::UnknownCatalogEntry, "no catalog metric named '" + name + "'");
}

}  // namespace rcpos
