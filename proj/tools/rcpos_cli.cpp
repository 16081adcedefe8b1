#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcpos/suite.hpp"

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RCPOS_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw rcpos::Error(rcpos::ErrorCode::ConfigError, std::string("RCPOS_SEED is not an unsigned integer: ") + env);
    }
  }
  return 1;
}

void emit(const rcpos::json& report, const std::string& format, const std::string& out) {
  std::string text;
  if (format == "json") text = report.dump(2) + "\n";
  else text = rcpos::render_markdown(report);
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw rcpos::Error(rcpos::ErrorCode::ConfigError, "cannot write " + out);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampled-point positivity verifier for Hermitian holomorphic vector bundles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rcpos::kToolVersion);

  rcpos::CheckOptions check;
  rcpos::SuiteOptions suite;
  std::string metric_file, out, format = "json";
  double tol_margin = rcpos::default_tolerances().margin;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::vector<std::string> metrics;

  auto common = [&](CLI::App* sc) {
    sc->add_option("--seed", seed, "master seed (default: $RCPOS_SEED or 1)");
    sc->add_option("--tol-margin", tol_margin, "inconclusive band on the normalized margin")->check(CLI::PositiveNumber);
    sc->add_option("--out", out, "report path (default: stdout)");
    sc->add_option("--format", format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}));
    sc->add_option("--jobs", jobs, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  };

  CLI::App* c = app.add_subcommand("check", "certify positivity notions at sampled points");
  c->add_option("--metric", metrics, "catalog id, e.g. fubini_study:2");
  c->add_option("--metric-file", metric_file, ".hmet metric file")->check(CLI::ExistingFile);
  c->add_option("--bundle", check.bundle, "bundle expression, e.g. ext(tangent,2)");
  c->add_option("--notion", check.notions, "rc+, rc-, griffiths+, hsc+, q+:<q> (repeatable)");
  c->add_option("--points", check.points, "sample points")->check(CLI::PositiveNumber);
  common(c);

  CLI::App* s = app.add_subcommand("paper-suite", "run the lemma battery over catalog or file metrics");
  s->add_option("--metric", suite.metrics, "catalog id or .hmet path (repeatable; default battery if omitted)");
  s->add_option("--metric-file", metric_file, ".hmet metric file")->check(CLI::ExistingFile);
  s->add_option("--points", suite.points, "sample points per metric")->check(CLI::PositiveNumber);
  s->add_option("--lemma-trials", suite.lemma_trials, "random trials per point for the minimizer relations")
      ->check(CLI::PositiveNumber);
  s->add_option("--sphere-samples", suite.sphere_samples, "Monte Carlo samples per point for the sphere average")
      ->check(CLI::PositiveNumber);
  common(s);

  std::string report_path, item;
  CLI::App* e = app.add_subcommand("explain", "re-evaluate and print the witness of one report item");
  e->add_option("report", report_path, "JSON report")->required();
  e->add_option("id", item, "item id, e.g. m0/p3/rc+/base or m0/hsc_minimizer")->required();

  CLI::App* cat = app.add_subcommand("catalog", "built-in metrics");
  CLI::App* cat_list = cat->add_subcommand("list", "list catalog entries");
  cat->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 3;
  }

  try {
    rcpos::Tolerances tol;
    tol.margin = tol_margin;
    const std::uint64_t master = seed != 0 ? seed : default_seed();

    if (*cat_list) {
      for (const auto& entry : rcpos::catalog_entries())
        std::cout << entry.usage << "\n    " << entry.description << "\n";
      return 0;
    }
    if (*c) {
      if (metrics.size() + (metric_file.empty() ? 0 : 1) != 1) {
        throw rcpos::Error(rcpos::ErrorCode::ConfigError, "check needs exactly one of --metric or --metric-file");
      }
      check.metric = metric_file.empty() ? metrics[0] : metric_file;
      check.seed = master;
      check.jobs = jobs;
      check.tol = tol;
      const rcpos::RunResult r = rcpos::run_check(check);
      emit(r.report, format, out);
      return r.exit_code;
    }
    if (*s) {
      if (!metric_file.empty()) suite.metrics.push_back(metric_file);
      suite.seed = master;
      suite.jobs = jobs;
      suite.tol = tol;
      const rcpos::RunResult r = rcpos::run_paper_suite(suite);
      emit(r.report, format, out);
      return r.exit_code;
    }
    if (*e) {
      std::ifstream f(report_path);
      if (!f) throw rcpos::Error(rcpos::ErrorCode::ConfigError, "cannot read " + report_path);
      const rcpos::json report = rcpos::json::parse(f);
      const rcpos::ExplainResult r = rcpos::explain_item(report, item, tol);
      (r.exit_code == 3 ? std::cerr : std::cout) << r.text;
      return r.exit_code;
    }
  } catch (const rcpos::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
  return 3;
}
