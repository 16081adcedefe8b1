#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "metric.hpp"

namespace rcpos {

namespace detail {

/// Recursive-descent parser for one expression line.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' '-'? INT)?
///   primary := NUMBER | 'i' | 'z'INT | 'conj' '(' 'z'INT ')'
///            | ('log' | 'exp' | 'absq') '(' expr ')' | '(' expr ')'
class ExprParser {
 public:
  ExprParser(std::string_view text, int line, int column_offset, int dim)
      : s_(text), line_(line), col0_(column_offset), dim_(dim) {}

  ExprPtr parse_all() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, col0_ + static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  int integer() {
    skip_ws();
    int value = 0;
    const char* first = s_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), value);
    if (ec != std::errc() || ptr == first) fail("expected an integer");
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = lhs + term();
      else if (accept('-')) lhs = lhs - term();
      else return lhs;
    }
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = lhs * unary();
      else if (accept('/')) lhs = lhs / unary();
      else return lhs;
    }
  }

  ExprPtr unary() {
    if (accept('-')) return ExprNode::make(ExprOp::Neg, {unary()});
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (accept('^')) {
      const bool neg = accept('-');
      const int k = integer();
      return ExprNode::make(ExprOp::PowInt, {base}, neg ? -k : k);
    }
    return base;
  }

  int coordinate_index() {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != 'z') fail("expected a coordinate z<k>");
    ++pos_;
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("expected a coordinate index");
    const int k = integer();
    if (k < 1 || k > dim_) fail("coordinate z" + std::to_string(k) + " outside dim=" + std::to_string(dim_));
    return k - 1;
  }

  ExprPtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      ExprPtr e = expr();
      expect(')');
      return e;
    }
    if (c == 'z') return ExprNode::make_coord(coordinate_index(), false);
    const std::size_t start = pos_;
    const std::string name = identifier();
    if (name == "i") return ExprNode::make_constant(Complex(0.0, 1.0));
    if (name == "conj") {
      expect('(');
      const int k = coordinate_index();
      expect(')');
      return ExprNode::make_coord(k, true);
    }
    ExprOp op;
    if (name == "log") op = ExprOp::Log;
    else if (name == "exp") op = ExprOp::Exp;
    else if (name == "absq") op = ExprOp::AbsSq;
    else {
      pos_ = start;
      fail(name.empty() ? "unexpected '" + std::string(1, c) + "'" : "unknown identifier '" + name + "'");
    }
    expect('(');
    ExprPtr arg = expr();
    expect(')');
    return ExprNode::make(op, {arg});
  }

  ExprPtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    const std::string text(s_.substr(start, pos_ - start));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      pos_ = start;
      fail("malformed number '" + text + "'");
    }
    return ExprNode::make_constant(v);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
  int col0_;
  int dim_;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view text, int line, int col) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("malformed number '" + std::string(text) + "'", line, col);
  }
  return v;
}

inline ChartDomain parse_domain(std::string_view text, int line, int col) {
  if (text.starts_with("product(") && text.ends_with(")")) {
    // product(<dim>@<domain>,<dim>@<domain>)
    const std::string_view inner = text.substr(8, text.size() - 9);
    std::vector<std::string_view> items;
    int depth = 0;
    std::size_t from = 0;
    for (std::size_t k = 0; k <= inner.size(); ++k) {
      if (k < inner.size() && inner[k] == '(') ++depth;
      if (k < inner.size() && inner[k] == ')') --depth;
      if (k == inner.size() || (inner[k] == ',' && depth == 0)) {
        items.push_back(inner.substr(from, k - from));
        from = k + 1;
      }
    }
    ChartDomain d;
    d.kind = ChartDomain::Kind::Product;
    for (auto item : items) {
      const auto at = item.find('@');
      if (at == std::string_view::npos) throw ParseError("product domain factor needs <dim>@<domain>", line, col);
      int dim = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + at, dim);
      if (ec != std::errc() || ptr != item.data() + at || dim < 1) throw ParseError("bad factor dimension", line, col);
      d.factors.emplace_back(dim, parse_domain(item.substr(at + 1), line, col));
    }
    return d;
  }
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= text.size(); ++k)
    if (k == text.size() || text[k] == ':') {
      parts.push_back(text.substr(start, k - start));
      start = k + 1;
    }
  if (parts[0] == "entire" && parts.size() == 1) return ChartDomain::entire();
  if (parts[0] == "polydisc" && parts.size() == 2) return ChartDomain::polydisc(parse_double(parts[1], line, col));
  if (parts[0] == "ball" && parts.size() == 2) return ChartDomain::ball(parse_double(parts[1], line, col));
  if (parts[0] == "shell" && parts.size() == 3)
    return ChartDomain::shell(parse_double(parts[1], line, col), parse_double(parts[2], line, col));
  throw ParseError("bad domain '" + std::string(text) + "'", line, col);
}

}  // namespace detail

/// Parses one expression in `dim` variables (useful for catalog factors and tests).
inline ExprPtr parse_expression(std::string_view text, int dim) {
  return detail::ExprParser(text, 1, 0, dim).parse_all();
}

/// Parses the `.hmet` metric format:
///
///   # comment
///   metric <name> dim=<n> rank=<r> [domain=entire|polydisc:R|ball:R|shell:A:B] [kahler=true|false]
///   h[a][b] = <expr>
///
/// Indices are 1-based. Unspecified entries are completed by Hermitian symmetry,
/// then zero off the diagonal; a missing diagonal entry is an error.
inline MetricField parse_metric(std::string_view source, const Tolerances& tol = default_tolerances()) {
  using detail::trim;
  int n = 0, r = 0;
  bool have_header = false;
  std::string name;
  ChartDomain domain = ChartDomain::entire();
  bool kahler = false;
  std::vector<ExprPtr> given;

  int line_no = 0;
  std::size_t start = 0;
  while (start <= source.size()) {
    std::size_t end = source.find('\n', start);
    if (end == std::string_view::npos) end = source.size();
    std::string_view raw = source.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) {
      if (end == source.size()) break;
      continue;
    }
    const int indent = static_cast<int>(line.data() - raw.data());

    if (!have_header) {
      std::istringstream words{std::string(line)};
      std::string word;
      words >> word;
      if (word != "metric") throw ParseError("expected 'metric <name> dim=<n> rank=<r>' header", line_no, indent + 1);
      if (!(words >> name)) throw ParseError("metric name missing", line_no, indent + 8);
      while (words >> word) {
        const int col = indent + 1 + static_cast<int>(line.find(word));
        const auto eq = word.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value, got '" + word + "'", line_no, col);
        const std::string key = word.substr(0, eq), val = word.substr(eq + 1);
        if (key == "dim" || key == "rank") {
          int v = 0;
          auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
          if (ec != std::errc() || ptr != val.data() + val.size() || v < 1) {
            throw ParseError(key + " must be a positive integer", line_no, col);
          }
          (key == "dim" ? n : r) = v;
        } else if (key == "domain") {
          domain = detail::parse_domain(val, line_no, col);
        } else if (key == "kahler") {
          if (val != "true" && val != "false") throw ParseError("kahler must be true or false", line_no, col);
          kahler = val == "true";
        } else {
          throw ParseError("unknown header key '" + key + "'", line_no, col);
        }
      }
      if (n == 0 || r == 0) throw ParseError("header needs dim=<n> and rank=<r>", line_no, indent + 1);
      given.assign(static_cast<std::size_t>(r * r), nullptr);
      have_header = true;
      if (end == source.size()) break;
      continue;
    }

    // h[a][b] = expr
    std::size_t p = 0;
    auto col_at = [&](std::size_t k) { return indent + static_cast<int>(k) + 1; };
    auto skip = [&] {
      while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
    };
    auto index = [&]() -> int {
      skip();
      if (p >= line.size() || line[p] != '[') throw ParseError("expected '['", line_no, col_at(p));
      ++p;
      skip();
      int v = 0;
      auto [ptr, ec] = std::from_chars(line.data() + p, line.data() + line.size(), v);
      if (ec != std::errc()) throw ParseError("expected an index", line_no, col_at(p));
      const std::size_t num_at = p;
      p = static_cast<std::size_t>(ptr - line.data());
      if (v < 1 || v > r) throw ParseError("index " + std::to_string(v) + " outside rank=" + std::to_string(r), line_no, col_at(num_at));
      skip();
      if (p >= line.size() || line[p] != ']') throw ParseError("expected ']'", line_no, col_at(p));
      ++p;
      return v - 1;
    };
    if (line[0] != 'h') throw ParseError("expected an entry 'h[a][b] = ...'", line_no, col_at(0));
    p = 1;
    const int a = index();
    const int b = index();
    skip();
    if (p >= line.size() || line[p] != '=') throw ParseError("expected '='", line_no, col_at(p));
    ++p;
    auto& slot = given[static_cast<std::size_t>(a * r + b)];
    if (slot) throw ParseError("entry given twice", line_no, col_at(0));
    slot = detail::ExprParser(line.substr(p), line_no, indent + static_cast<int>(p), n).parse_all();
    if (end == source.size()) break;
  }
  if (!have_header) throw ParseError("empty metric source", line_no, 1);

  MetricMetadata meta;
  meta.name = name;
  meta.kahler_claimed = kahler;
  meta.source = std::string(source);
  return complete_metric(n, r, std::move(given), domain, std::move(meta), tol);
}

inline MetricField load_metric_file(const std::string& path, const Tolerances& tol = default_tolerances()) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open metric file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_metric(ss.str(), tol);
}

}  // namespace rcpos
