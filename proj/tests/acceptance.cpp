// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <iostream>
#include <sstream>

#include "rcpos/oracle.hpp"
#include "rcpos/suite.hpp"

using namespace rcpos;

namespace {

// Pinned tolerances.
constexpr double kFdTol = 1e-6;
constexpr double kOriginTol = 1e-9;
constexpr double kCurvatureSeconds = 10.0;
constexpr double kSymmetryTol = 1e-8;
constexpr double kHopfMinResidual = 1e-3;
constexpr double kLemmaSeconds = 60.0;
constexpr double kSffTol = 1e-6;
constexpr double kPsdTol = -1e-8;
constexpr double kProjTol = 1e-6;
constexpr int kProjMinPositive = 2;
constexpr double kSphereZ = 3.0;
constexpr double kGridTol = 1e-4;

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_diff(const Tensor4& a, const Tensor4& b) {
  return (a - b).max_abs() / std::max(1.0, b.max_abs());
}

std::vector<CVector> points(const MetricField& m, int count, std::string_view tag) {
  return sample_points(m, count, kSeed, tag);
}

Outcome fubini_study_curvature() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const MetricField m = catalog_from_id("fubini_study:" + std::to_string(n));
    for (const CVector& z : points(m, 100, "fd")) {
      const Tensor4 ad = chern_curvature(m, z).R;
      worst = std::max(worst, rel_diff(ad, chern_curvature_from_jets(finite_difference_jets(m, z))));
    }
  }
  const double origin = chern_curvature(catalog_from_id("fubini_study:1"), CVector::Zero(1)).R(0, 0, 0, 0).real();
  const double secs = seconds_since(t0);
  return {worst <= kFdTol && std::abs(origin - 2.0) <= kOriginTol && secs < kCurvatureSeconds,
          "max fd rel err " + fmt(worst) + ", R(P1, 0) = " + std::to_string(origin) + ", " + std::to_string(secs) + " s"};
}

Outcome kahler_symmetries() {
  double worst_sym = 0.0, worst_scalar = 0.0;
  for (const std::string id : {"fubini_study:1", "fubini_study:2", "fubini_study:3", "flat:3", "poincare_disc:2",
                               "fs_perturbed:2:0", "product(fubini_study:1,poincare_disc:1)"}) {
    const MetricField m = catalog_from_id(id);
    for (const CVector& z : points(m, 100, "kahler")) {
      const CurvaturePoint cp = chern_curvature(m, z);
      const double scale = std::max(1.0, cp.R.max_abs());
      worst_sym = std::max(worst_sym, curvature_symmetry_residual(cp.R) / scale);
      const ScalarPanel p = scalar_panel(cp);
      worst_scalar = std::max(worst_scalar, std::abs(p.s - p.s_hat) / std::max(1.0, std::abs(p.s)));
    }
  }
  const MetricField hopf = catalog_from_id("hopf:2");
  double hopf_res = std::numeric_limits<double>::infinity();  // smallest over points: fails everywhere
  for (const CVector& z : points(hopf, 100, "kahler")) {
    const Tensor4 R = chern_curvature(hopf, z).R;
    hopf_res = std::min(hopf_res, curvature_symmetry_residual(R) / std::max(1.0, R.max_abs()));
  }
  return {worst_sym <= kSymmetryTol && worst_scalar <= kSymmetryTol && hopf_res > kHopfMinResidual,
          "symmetry " + fmt(worst_sym) + ", |s - s_hat| " + fmt(worst_scalar) + ", min hopf symmetry residual " + fmt(hopf_res)};
}

Outcome minimizer_lemma() {
  const auto t0 = std::chrono::steady_clock::now();
  const Tolerances tol = default_tolerances();
  double worst = 0.0;
  int failures = 0, checked = 0, skipped = 0;
  for (const std::string id : {"fubini_study:2", "fs_perturbed:2:0", "fs_perturbed:2:0.05",
                               "product(fubini_study:1,fubini_study:1)"}) {
    const MetricField m = catalog_from_id(id);
    const auto pts = points(m, 25, "lemma");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      CurvaturePoint cp = chern_curvature(m, pts[k]);
      // Kahler-verified point: first-order condition and curvature symmetry both hold
      const double sym = curvature_symmetry_residual(cp.R) / std::max(1.0, cp.R.max_abs());
      cp.kahler_verified = kahler_residual(m.jets(pts[k])) <= tol.kahler && sym <= tol.kahler;
      if (!cp.kahler_verified) {
        ++skipped;
        continue;
      }
      ++checked;
      const auto rep = verify_minimizer_lemma_strict(cp, hsc_extremum(cp), 200, split_seed(kSeed, 3, k));
      failures += !rep.all_passed;
      for (const auto& r : rep.relations) worst = std::max(worst, r.worst_residual);
    }
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && checked >= 75 && secs < kLemmaSeconds,
          std::to_string(checked) + " verified points (" + std::to_string(skipped) + " not Kahler-verified), " +
              std::to_string(failures) + " failing, worst residual " + fmt(worst) + ", " + std::to_string(secs) + " s"};
}

Outcome second_fundamental_form() {
  const MetricField m = parse_metric(
      "metric sff dim=2 rank=2\nh[1][1] = 1 + absq(z1)\nh[2][2] = 1 + absq(z2)\nh[1][2] = z1*conj(z2)\n");
  double worst = 0.0, min_eig = 0.0;
  for (const CVector& z : points(m, 50, "sff")) {
    const MetricJets j = m.jets(z);
    const SubQuotient sq = sub_quotient_curvature(j, 1, j.value, z);
    worst = std::max({worst, sq.second_fundamental_residual, sq.quotient_residual});
    const Tensor4 dS = restrict_bundle(sq.ambient.R, 0, 1) - sq.sub.R;
    const Tensor4 dQ = sq.quot.R - restrict_bundle(sq.ambient.R, 1, 1);
    const CVector a = CVector::Ones(1);
    min_eig = std::min({min_eig, hermitian_eig(hermitian_part(dS.base_form(a))).values[0],
                        hermitian_eig(hermitian_part(dQ.base_form(a))).values[0]});
  }
  return {worst <= kSffTol && min_eig >= kPsdTol, "max residual " + fmt(worst) + ", min gap eigenvalue " + fmt(min_eig)};
}

Outcome trace_implication() {
  int met = 0, failed = 0;
  for (const std::string id : {"fubini_study:1", "fubini_study:2", "fubini_study:3",
                               "product(fubini_study:1,fubini_study:1)", "product(fubini_study:1,fubini_study:2)"}) {
    const MetricField m = catalog_from_id(id);
    const auto pts = points(m, 10, "trace");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const MetricJets j = m.jets(pts[k]);
      CertifierOptions o;
      o.seed = split_seed(kSeed, 5, k);
      const TraceImplication t = verify_trace_implication(j, j.value, pts[k], 3, o);
      met += t.hypothesis_met;
      failed += t.hypothesis_met && !t.conclusion_verified;
    }
  }
  return {met > 0 && failed == 0, std::to_string(met) + " points with hypothesis met, " + std::to_string(failed) + " failures"};
}

Outcome projectivization() {
  const MetricField m = parse_metric(
      "metric twisted dim=2 rank=2 domain=polydisc:0.8\n"
      "h[1][1] = (1 + absq(z1) + absq(z2))^-1\n"
      "h[2][2] = (1 + absq(z1) + absq(z2))^-1\n"
      "h[1][2] = 0.1*z1*conj(z2)*(1 + absq(z1) + absq(z2))^-1\n");
  Rng rng(split_seed(kSeed, 6, 0));
  double worst = 0.0;
  int min_pos = 1 << 20;
  for (const CVector& z : points(m, 50, "proj")) {
    const ProjectivizationPoint pp = projectivization_curvature(m, z, random_unit_vector(2, rng));
    worst = std::max(worst, pp.residual);
    min_pos = std::min(min_pos, pp.inertia.positive);
  }
  return {worst <= kProjTol && min_pos >= kProjMinPositive,
          "max residual " + fmt(worst) + ", min positive eigenvalues " + std::to_string(min_pos)};
}

Outcome sphere_averages() {
  auto worst_z = [](const std::string& id, int count) {
    const MetricField m = catalog_from_id(id);
    const auto pts = points(m, count, "sphere");
    double worst = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k)
      worst = std::max(worst, sphere_average_hsc(chern_curvature(m, pts[k]), 100000, split_seed(kSeed, 7, k)).z_score);
    return worst;
  };
  const double required = std::max(worst_z("fubini_study:2", 5), worst_z("flat:3", 5));
  // non-constant integrands, one Bonferroni-corrected threshold over both metrics
  const double varying = std::max(worst_z("hopf:2", 5), worst_z("product(fubini_study:1,fubini_study:1)", 5));
  const double zcrit = bonferroni_z(10);
  return {required <= kSphereZ && varying <= zcrit,
          "max z " + fmt(required) + " (constant cases), " + fmt(varying) + " against " + fmt(zcrit) + " (varying cases)"};
}

Outcome refutations_and_grid(const json& report) {
  int refuted = 0, bad = 0, grid_checked = 0;
  double worst_grid = 0.0;
  for (const auto& mj : report["metrics"]) {
    const MetricField m = metric_from_descriptor(mj["metric"]);
    for (const auto& p : mj["points"]) {
      const CVector z = vector_from_json(p["z"]);
      for (const auto& c : p["certificates"]) {
        const std::string notion = c["notion"], verdict = c["verdict"];
        const bool rc = notion == "rc+" || notion == "rc-";
        if (verdict != "refuted" && !rc) continue;
        const CurvaturePoint cp = derived_curvature(*parse_bundle(c["bundle"].get<std::string>()), m, z);
        const double scale = c["scale"].get<double>();
        if (verdict == "refuted") {
          ++refuted;
          const CVector a = vector_from_json(c["witness"]["section"]);
          const CVector v = vector_from_json(c["witness"]["direction"]);
          const double sign = notion == "rc-" ? -1.0 : 1.0;
          // exact re-evaluation: the inner maximum (rc) or the pair value (griffiths, hsc) must be negative
          double again = 0.0;
          if (rc) again = rc_inner_max(cp, a, sign) / scale;
          else if (notion.rfind("q+", 0) == 0) again = certify_q_positive(cp, parse_notion(notion).q).margin;
          else again = normalized_objective(cp, v, a) / scale;
          if (!(again < 0.0)) ++bad;
        }
        if (rc && cp.rank() <= 2 && scale > 0.0) {
          ++grid_checked;
          const double sign = notion == "rc-" ? -1.0 : 1.0;
          const double grid =
              grid_minimize_cp1(cp.rank(), [&](const CVector& a) { return rc_inner_max(cp, a, sign) / scale; }).value;
          worst_grid = std::max(worst_grid, std::abs(grid - c["margin"].get<double>()));
        }
      }
    }
  }
  return {refuted > 0 && bad == 0 && worst_grid <= kGridTol,
          std::to_string(refuted) + " refuted certificates, " + std::to_string(bad) + " unsound, grid agreement " +
              fmt(worst_grid) + " over " + std::to_string(grid_checked)};
}

Outcome determinism(const json& first) {
  SuiteOptions o;
  o.seed = kSeed;
  o.jobs = 4;
  const json second = without_timing(run_paper_suite(o).report);
  const auto dir = std::filesystem::temp_directory_path() / "rcpos_acceptance";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "suite.json").string();
  const std::string cmd = std::string(RCPOS_CLI_PATH) + " paper-suite --jobs 1 --seed " + std::to_string(kSeed) +
                          " --out " + path + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  json third;
  if (std::ifstream f(path); f) third = without_timing(json::parse(f));
  const bool same_jobs = without_timing(first) == second;
  const bool same_cli = without_timing(first) == third;
  return {same_jobs && same_cli,
          std::string("jobs 1 vs 4 ") + (same_jobs ? "identical" : "differ") + ", cli rerun " +
              (same_cli ? "identical" : "differs") + " (cli status " + std::to_string(status) + ")"};
}

}  // namespace

int main() {
  bool all = true;
  auto run = [&](int id, const char* name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << o.detail << std::endl;
  };
  run(1, "curvature engine", fubini_study_curvature);
  run(2, "kahler symmetries", kahler_symmetries);
  run(3, "minimizer relations", minimizer_lemma);
  run(4, "second fundamental form", second_fundamental_form);
  run(5, "trace implication", trace_implication);
  run(6, "projectivization", projectivization);
  run(7, "sphere averages", sphere_averages);

  json suite;
  try {
    SuiteOptions o;
    o.seed = kSeed;
    o.jobs = 1;
    suite = run_paper_suite(o).report;
  } catch (const std::exception& e) {
    std::cout << "suite run failed: " << e.what() << std::endl;
  }
  run(8, "refutation soundness", [&] { return refutations_and_grid(suite); });
  run(9, "determinism", [&] { return determinism(suite); });
  return all ? 0 : 1;
}
