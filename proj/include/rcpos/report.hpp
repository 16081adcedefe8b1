#pragma once

#include <filesystem>
#include <sstream>
#include <string>

#include <json.hpp>

#include "certify.hpp"
#include "parser.hpp"
#include "catalog.hpp"

namespace rcpos {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

inline json to_json(Complex c) { return json::array({c.real(), c.imag()}); }

inline json to_json(const CVector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(to_json(v[k]));
  return a;
}

inline json to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    json row = json::array();
    for (Eigen::Index b = 0; b < m.cols(); ++b) row.push_back(to_json(m(a, b)));
    rows.push_back(row);
  }
  return rows;
}

inline CVector vector_from_json(const json& j) {
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = Complex(j[k][0].get<double>(), j[k][1].get<double>());
  return v;
}

inline json to_json(const Inertia& c) {
  return json{{"positive", c.positive}, {"zero", c.zero}, {"negative", c.negative}};
}

inline json to_json(const Tolerances& t) {
  return json{{"hermitian", t.hermitian},
              {"tensor_symmetry", t.tensor_symmetry},
              {"unit_norm", t.unit_norm},
              {"eig_offdiag", t.eig_offdiag},
              {"eig_max_sweeps", t.eig_max_sweeps},
              {"eig_residual", t.eig_residual},
              {"positive_definite", t.positive_definite},
              {"jet_consistency", t.jet_consistency},
              {"singular_value", t.singular_value},
              {"fd_step", t.fd_step},
              {"fd_relative", t.fd_relative},
              {"kahler", t.kahler},
              {"rank_cap", t.rank_cap},
              {"frame_pivot", t.frame_pivot},
              {"second_fundamental", t.second_fundamental},
              {"gauge", t.gauge},
              {"projectivization", t.projectivization},
              {"margin", t.margin},
              {"zero_band", t.zero_band},
              {"lemma", t.lemma},
              {"semidefinite", t.semidefinite},
              {"trace_margin", t.trace_margin},
              {"grid_agreement", t.grid_agreement}};
}

/// Certificate as it appears in reports. `bundle` names the derived bundle so
/// the witness can be re-evaluated from the metric alone.
inline json to_json(const PositivityCertificate& c, const std::string& id, const std::string& bundle) {
  json j{{"id", id},
         {"notion", to_string(c.notion)},
         {"bundle", bundle},
         {"verdict", to_string(c.verdict)},
         {"margin", c.margin},
         {"raw_margin", c.raw_margin},
         {"scale", c.diagnostics.scale},
         {"witness",
          {{"section", to_json(c.witness_section)},
           {"direction", to_json(c.witness_direction)},
           {"objective", c.witness_objective}}},
         {"diagnostics",
          {{"restarts", c.diagnostics.restarts},
           {"refined", c.diagnostics.refined},
           {"iterations", c.diagnostics.iterations},
           {"grid_size", c.diagnostics.grid_size}}}};
  if (c.counts) j["counts"] = to_json(*c.counts);
  return j;
}

/// Metric from a catalog id or a .hmet path.
inline MetricField resolve_metric(const std::string& source, const Tolerances& tol = default_tolerances()) {
  std::error_code ec;
  if (source.size() > 5 && source.substr(source.size() - 5) == ".hmet") return load_metric_file(source, tol);
  if (std::filesystem::is_regular_file(source, ec)) return load_metric_file(source, tol);
  return catalog_from_id(source, tol);
}

/// Text that rebuilds the metric without the original file: catalog id or DSL.
inline json metric_descriptor(const MetricField& m, const std::string& requested) {
  const bool from_catalog = m.metadata().source == requested && requested.find('\n') == std::string::npos &&
                            requested.find("metric ") != 0;
  json j{{"requested", requested},
         {"name", m.metadata().name},
         {"dim", m.base_dim()},
         {"rank", m.rank()},
         {"domain", m.domain().to_string()},
         {"kahler_claimed", m.metadata().kahler_claimed}};
  if (from_catalog) j["catalog_id"] = requested;
  else j["dsl"] = m.to_dsl();
  return j;
}

inline MetricField metric_from_descriptor(const json& d, const Tolerances& tol = default_tolerances()) {
  if (d.contains("catalog_id")) return catalog_from_id(d["catalog_id"].get<std::string>(), tol);
  if (d.contains("dsl")) return parse_metric(d["dsl"].get<std::string>(), tol);
  throw Error(ErrorCode::ConfigError, "report metric entry has neither catalog_id nor dsl");
}

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

inline std::string fmt_vec(const json& v) {
  std::string s = "(";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ", ";
    s += fmt(v[k][0].get<double>());
    const double im = v[k][1].get<double>();
    s += (im < 0 ? " - " : " + ") + fmt(std::abs(im)) + "i";
  }
  return s + ")";
}

}  // namespace detail

/// Markdown rendering of a report; carries no information beyond the JSON.
inline std::string render_markdown(const json& r) {
  std::ostringstream os;
  os << "# rcpos " << r.value("command", std::string("report")) << "\n\n";
  os << "- tool version: " << r["tool"]["version"].get<std::string>() << "\n";
  os << "- schema version: " << r["schema_version"].get<int>() << "\n";
  os << "- seed: " << r["config"]["seed"].get<std::uint64_t>() << "\n";
  os << "- overall: **" << r["overall"]["verdict"].get<std::string>() << "** (exit "
     << r["overall"]["exit_code"].get<int>() << ")\n\n";
  for (const auto& m : r["metrics"]) {
    os << "## " << m["metric"]["requested"].get<std::string>() << "\n\n";
    if (m.contains("kahler")) {
      os << "Kahler (first-order, sampled): " << (m["kahler"]["kahler"].get<bool>() ? "yes" : "no")
         << ", worst residual " << detail::fmt(m["kahler"]["worst_residual"].get<double>()) << "\n\n";
    }
    if (m.contains("lemmas") && !m["lemmas"].empty()) {
      os << "| row | mode | evaluated | hypothesis met | conclusion verified | worst residual | status |\n";
      os << "|---|---|---|---|---|---|---|\n";
      for (const auto& l : m["lemmas"]) {
        os << "| " << l["name"].get<std::string>() << " | " << l["mode"].get<std::string>() << " | "
           << l["evaluated"].get<int>() << " | " << l["hypothesis_met"].get<int>() << " | "
           << l["conclusion_verified"].get<int>() << " | " << detail::fmt(l["worst_residual"].get<double>()) << " | "
           << l["status"].get<std::string>() << " |\n";
      }
      os << "\n";
    }
    int refuted = 0, inconclusive = 0, certified = 0;
    for (const auto& p : m["points"])
      for (const auto& c : p["certificates"]) {
        const auto v = c["verdict"].get<std::string>();
        refuted += v == "refuted";
        inconclusive += v == "inconclusive";
        certified += v == "certified";
      }
    os << "Certificates: " << certified << " certified, " << refuted << " refuted, " << inconclusive
       << " inconclusive.\n\n";
    for (const auto& p : m["points"])
      for (const auto& c : p["certificates"]) {
        if (c["verdict"].get<std::string>() == "certified") continue;
        os << "- `" << c["id"].get<std::string>() << "` " << c["verdict"].get<std::string>() << ", margin "
           << detail::fmt(c["margin"].get<double>()) << ", a = " << detail::fmt_vec(c["witness"]["section"])
           << ", v = " << detail::fmt_vec(c["witness"]["direction"]) << "\n";
      }
    os << "\n";
  }
  return os.str();
}

}  // namespace rcpos
