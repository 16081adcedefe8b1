#include <gtest/gtest.h>

#include "rcpos/oracle.hpp"
#include "support.hpp"

using namespace rcpos;

namespace {

CurvaturePoint at(const std::string& id, const CVector& z) { return chern_curvature(catalog_from_id(id), z); }

CurvaturePoint negated(CurvaturePoint cp) {
  cp.R = -cp.R;
  return cp;
}

CertifierOptions seeded(std::uint64_t s) {
  CertifierOptions o;
  o.seed = s;
  return o;
}

// Grid over directions a in the original bundle frame; the inner max is the
// generalized eigenproblem against g, so no orthonormal frame is involved.
double independent_grid_margin(const CurvaturePoint& cp, double sign, double scale) {
  return grid_minimize_cp1(cp.rank(), [&](const CVector& a) { return rc_inner_max(cp, a, sign) / scale; }).value;
}

}  // namespace

TEST(RcPositivity, CatalogVerdicts) {
  const MetricField fs2 = catalog_from_id("fubini_study:2");
  for (const CVector& z : test::points(fs2, 10, 1)) {
    const auto c = certify_rc_positive(chern_curvature(fs2, z), seeded(1));
    EXPECT_EQ(c.verdict, Verdict::Certified);
    EXPECT_GT(c.margin, 0.0);
  }
  const auto flat = certify_rc_positive(at("flat:2", CVector::Zero(2)));
  EXPECT_EQ(flat.verdict, Verdict::Inconclusive);
  EXPECT_EQ(flat.margin, 0.0);

  const CurvaturePoint dual = derived_curvature(*parse_bundle("dual(tangent)"), catalog_from_id("fubini_study:1"), CVector::Zero(1));
  const auto refuted = certify_rc_positive(dual);
  EXPECT_EQ(refuted.verdict, Verdict::Refuted);
  EXPECT_LE(rc_inner_max(dual, refuted.witness_section, 1.0), 0.0);
  EXPECT_EQ(certify_rc_negative(dual).verdict, Verdict::Certified);

  const auto poincare = certify_rc_positive(at("poincare_disc:1", CVector::Constant(1, Complex(0.3, 0.1))));
  EXPECT_EQ(poincare.verdict, Verdict::Refuted);
}

TEST(RcPositivity, DualityOnCatalog) {
  for (const std::string id : {"fubini_study:2", "flat:2", "poincare_disc:2", "hopf:2",
                               "product(fubini_study:1,poincare_disc:1)", "fs_perturbed:2:0.05"}) {
    const MetricField m = catalog_from_id(id);
    for (const CVector& z : test::points(m, 5, 2)) {
      const CurvaturePoint e = derived_curvature(*parse_bundle("base"), m, z);
      const CurvaturePoint d = derived_curvature(*parse_bundle("dual(base)"), m, z);
      EXPECT_EQ(certify_rc_positive(e, seeded(3)).verdict, certify_rc_negative(d, seeded(3)).verdict) << id;
      EXPECT_EQ(certify_rc_negative(e, seeded(3)).verdict, certify_rc_positive(d, seeded(3)).verdict) << id;
    }
  }
}

TEST(RcPositivity, GridOracleAgreement) {
  std::vector<std::pair<MetricField, std::string>> cases = {
      {catalog_from_id("fubini_study:2"), "base"},
      {catalog_from_id("poincare_disc:2"), "base"},
      {catalog_from_id("hopf:2"), "base"},
      {catalog_from_id("product(fubini_study:1,poincare_disc:1)"), "base"},
      {parse_metric(test::kSffRank2), "base"},
      {parse_metric(test::kGriffithsRank2), "dual(base)"},
      {parse_metric(test::kCurveRank2), "base"},
      {parse_metric(test::kCurveRank2), "dual(base)"}};
  for (const auto& [m, bundle] : cases)
    for (const CVector& z : test::points(m, 4, 4)) {
      const CurvaturePoint cp = derived_curvature(*parse_bundle(bundle), m, z);
      for (double sign : {1.0, -1.0}) {
        const auto c = sign > 0 ? certify_rc_positive(cp, seeded(5)) : certify_rc_negative(cp, seeded(5));
        if (c.diagnostics.scale == 0.0) continue;
        EXPECT_NEAR(c.margin, independent_grid_margin(cp, sign, c.diagnostics.scale), 1e-4) << m.metadata().name;
        EXPECT_NEAR(c.margin, grid_rc_margin(cp, sign).value, 1e-4);
      }
    }
}

TEST(RcPositivity, RefutationWitnessesAreSound) {
  for (const std::string id : {"poincare_disc:2", "hopf:2", "product(fubini_study:1,poincare_disc:1)"}) {
    const MetricField m = catalog_from_id(id);
    for (const CVector& z : test::points(m, 5, 6))
      for (const std::string b : {"base", "dual(base)", "ext(base,2)", "sym(base,2)"}) {
        const CurvaturePoint cp = derived_curvature(*parse_bundle(b), m, z);
        const auto c = certify_rc_positive(cp, seeded(7));
        if (c.verdict != Verdict::Refuted) continue;
        EXPECT_LE(recheck_witness(cp, c), default_tolerances().margin) << id << " " << b;
        EXPECT_LE(c.witness_objective, default_tolerances().margin * c.diagnostics.scale);
      }
  }
}

TEST(RcPositivity, ScaleAndPhaseInvariance) {
  const MetricField m = parse_metric(test::kSffRank2);
  Rng rng(9);
  for (const CVector& z : test::points(m, 5, 8)) {
    const CurvaturePoint cp = chern_curvature(m, z);
    CurvaturePoint scaled = cp;
    scaled.R *= 3.5;
    const auto a = certify_rc_positive(cp, seeded(1)), b = certify_rc_positive(scaled, seeded(1));
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_NEAR(a.margin, b.margin, 1e-12);
    EXPECT_NEAR(b.raw_margin, 3.5 * a.raw_margin, 1e-10 * std::max(1.0, std::abs(b.raw_margin)));
    const CVector v = random_unit_vector(2, rng), s = random_unit_vector(2, rng);
    const double base = normalized_objective(cp, v, s);
    const double turned = normalized_objective(cp, std::polar(1.0, 0.7) * v, std::polar(1.0, -2.1) * s);
    EXPECT_NEAR(base, turned, 1e-12);
  }
}

TEST(RcPositivity, SameSeedSameCertificate) {
  const CurvaturePoint cp = chern_curvature(parse_metric(test::kSffRank2), CVector::Constant(2, Complex(0.2, -0.4)));
  const auto a = certify_rc_positive(cp, seeded(42)), b = certify_rc_positive(cp, seeded(42));
  EXPECT_EQ(a.margin, b.margin);
  EXPECT_EQ(a.witness_section, b.witness_section);
  EXPECT_EQ(a.witness_direction, b.witness_direction);
}

TEST(Griffiths, Verdicts) {
  const auto fs = certify_griffiths(at("fubini_study:1", CVector::Zero(1)));
  EXPECT_EQ(fs.verdict, Verdict::Certified);
  EXPECT_NEAR(fs.raw_margin, 2.0, 1e-12);
  const auto prod = certify_griffiths(at("product(fubini_study:1,flat:1)", CVector::Constant(2, 0.3)));
  EXPECT_NE(prod.verdict, Verdict::Certified);
  EXPECT_NEAR(prod.margin, 0.0, 1e-7);
  const CurvaturePoint pd = at("poincare_disc:2", CVector::Constant(2, Complex(0.2, 0.1)));
  EXPECT_EQ(certify_griffiths(pd).verdict, Verdict::Refuted);
  EXPECT_EQ(certify_griffiths(negated(pd)).verdict, Verdict::Certified);
  // Griffiths positivity implies RC positivity
  const MetricField tw = parse_metric(test::kGriffithsRank2);
  for (const CVector& z : test::points(tw, 10, 10)) {
    const CurvaturePoint cp = chern_curvature(tw, z);
    if (certify_griffiths(cp).verdict == Verdict::Certified) EXPECT_EQ(certify_rc_positive(cp).verdict, Verdict::Certified);
  }
}

TEST(QPositivity, Counts) {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 2.0;
  d(1, 1) = -1.0;
  const Inertia c = q_positivity_count(d, CMatrix::Identity(3, 3));
  EXPECT_EQ(c.positive, 1);
  EXPECT_EQ(c.negative, 1);
  EXPECT_EQ(c.zero, 1);

  const MetricField fs2 = catalog_from_id("fubini_study:2");
  for (const CVector& z : test::points(fs2, 5, 11)) {
    const auto q = certify_q_positive(derived_curvature(*parse_bundle("det(tangent)"), fs2, z), 0);
    ASSERT_TRUE(q.counts.has_value());
    EXPECT_EQ(q.counts->positive, 2);
    EXPECT_EQ(q.verdict, Verdict::Certified);
  }
  const MetricField hopf = catalog_from_id("hopf:2");
  for (const CVector& z : test::points(hopf, 10, 12)) {
    const auto q = certify_q_positive(derived_curvature(*parse_bundle("det(tangent)"), hopf, z), 1);
    EXPECT_GE(q.counts->positive, 1);
  }
  const MetricField line = parse_metric("metric w dim=2 rank=1 domain=polydisc:1\nh[1][1] = exp(-absq(z1) + absq(z2))\n");
  const auto w = certify_q_positive(chern_curvature(line, CVector::Zero(2)), 1);
  EXPECT_EQ(w.counts->positive, 1);
  EXPECT_EQ(w.counts->negative, 1);
  EXPECT_EQ(w.verdict, Verdict::Certified);
  EXPECT_EQ(certify_q_positive(chern_curvature(line, CVector::Zero(2)), 0).verdict, Verdict::Refuted);
  EXPECT_THROW(certify_q_positive(chern_curvature(line, CVector::Zero(2)), 2), Error);
}

TEST(HolomorphicSectional, Extrema) {
  const HscExtremum flat = hsc_extremum(at("flat:2", CVector::Zero(2)));
  EXPECT_EQ(flat.min_value, 0.0);
  const MetricField fs2 = catalog_from_id("fubini_study:2");
  for (const CVector& z : test::points(fs2, 5, 13)) {
    const HscExtremum e = hsc_extremum(chern_curvature(fs2, z));
    EXPECT_NEAR(e.min_value, 2.0, 1e-9);
    EXPECT_LE(e.max_value - e.min_value, 1e-6);
  }
  const CurvaturePoint prod = at("product(fubini_study:1,fubini_study:1)", CVector::Zero(2));
  const HscExtremum p = hsc_extremum(prod);
  EXPECT_NEAR(p.min_value, 1.0, 1e-9);
  EXPECT_NEAR(std::abs(p.argmin[0]), std::abs(p.argmin[1]), 1e-4);
  EXPECT_NEAR(p.min_value, grid_hsc_min(prod).value, 1e-6);
  const MetricField hopf = catalog_from_id("hopf:2");
  for (const CVector& z : test::points(hopf, 5, 14)) {
    const CurvaturePoint cp = chern_curvature(hopf, z);
    EXPECT_NEAR(hsc_extremum(cp).min_value, grid_hsc_min(cp).value, 1e-6);
  }
}

TEST(MinimizerLemma, KahlerAndExpectFailureModes) {
  const MetricField fs2 = catalog_from_id("fubini_study:2");
  for (const CVector& z : test::points(fs2, 5, 15)) {
    CurvaturePoint cp = chern_curvature(fs2, z);
    cp.kahler_verified = true;
    const auto rep = verify_minimizer_lemma(cp, hsc_extremum(cp), 200, 1);
    EXPECT_EQ(rep.mode, LemmaMode::Normal);
    EXPECT_TRUE(rep.all_passed);
    for (const auto& r : rep.relations) EXPECT_LE(r.worst_residual, 1e-6) << r.name;
  }
  CurvaturePoint flat = at("flat:2", CVector::Zero(2));
  flat.kahler_verified = true;
  const auto fr = verify_minimizer_lemma(flat, hsc_extremum(flat), 50, 1);
  for (const auto& r : fr.relations) EXPECT_EQ(r.worst_residual, 0.0);

  const CurvaturePoint hopf = at("hopf:2", CVector::Constant(2, Complex(0.5, 0.3)));
  EXPECT_EQ(verify_minimizer_lemma(hopf, hsc_extremum(hopf), 50, 1).mode, LemmaMode::ExpectFailure);
  EXPECT_THROW(verify_minimizer_lemma_strict(hopf, hsc_extremum(hopf), 50, 1), Error);

  // the perturbation vanishes to first order at the origin, so the point looks
  // Kahler there while the relations fail; elsewhere they happen to hold
  const CurvaturePoint pert = at("fs_perturbed:2:0.05", CVector::Zero(2));
  const auto pr = verify_minimizer_lemma(pert, hsc_extremum(pert), 200, 1);
  EXPECT_EQ(pr.mode, LemmaMode::ExpectFailure);
  EXPECT_FALSE(pr.all_passed);
  EXPECT_GT(pr.relations[3].worst_residual, 1e-2);
}

TEST(TraceImplication, Cases) {
  const MetricField fs2 = catalog_from_id("fubini_study:2");
  const CVector z = CVector::Constant(2, Complex(0.1, 0.2));
  const MetricJets j = fs2.jets(z);
  const TraceImplication t = verify_trace_implication(j, j.value, z, 3, seeded(1));
  EXPECT_TRUE(t.hypothesis_met);
  EXPECT_TRUE(t.conclusion_verified);
  EXPECT_EQ(t.conclusions.size(), 5u);
  for (const std::string id : {"flat:2", "poincare_disc:2"}) {
    const MetricJets k = catalog_from_id(id).jets(CVector::Zero(2));
    const TraceImplication v = verify_trace_implication(k, k.value, CVector::Zero(2), 3, seeded(1));
    EXPECT_FALSE(v.hypothesis_met) << id;
    EXPECT_TRUE(v.conclusions.empty());
  }
}
