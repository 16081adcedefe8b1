#include <gtest/gtest.h>

#include "rcpos/curvature.hpp"
#include "support.hpp"

using namespace rcpos;

namespace {

double rel_diff(const Tensor4& a, const Tensor4& b) {
  return (a - b).max_abs() / std::max(1.0, b.max_abs());
}

// Closed form for the Fubini-Study normalization with curvature 2 on P^1:
// R_{i jbar k lbar} = g_{i jbar} g_{k lbar} + g_{i lbar} g_{k jbar}.
Tensor4 fs_closed_form(const CMatrix& g) {
  const int n = static_cast<int>(g.rows());
  Tensor4 R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) R(i, j, k, l) = g(i, j) * g(k, l) + g(i, l) * g(k, j);
  return R;
}

}  // namespace

TEST(Curvature, FlatIsExactlyZero) {
  for (int n = 1; n <= 3; ++n) {
    const MetricField m = catalog_from_id("flat:" + std::to_string(n));
    for (const CVector& z : test::points(m, 5, 1)) EXPECT_EQ(chern_curvature(m, z).R.max_abs(), 0.0);
  }
}

TEST(Curvature, LineBundleValuesAtOrigin) {
  EXPECT_NEAR(chern_curvature(catalog_from_id("fubini_study:1"), CVector::Zero(1)).R(0, 0, 0, 0).real(), 2.0, 1e-9);
  EXPECT_NEAR(chern_curvature(catalog_from_id("poincare_disc:1"), CVector::Zero(1)).R(0, 0, 0, 0).real(), -2.0, 1e-9);
}

TEST(Curvature, FubiniStudyMatchesClosedFormAndFiniteDifferences) {
  for (int n = 1; n <= 3; ++n) {
    const MetricField m = catalog_from_id("fubini_study:" + std::to_string(n));
    for (const CVector& z : test::points(m, 100, 100 + static_cast<std::uint64_t>(n))) {
      const CurvaturePoint cp = chern_curvature(m, z);
      EXPECT_LE(rel_diff(cp.R, fs_closed_form(cp.base_metric)), 1e-12);
      const Tensor4 fd = chern_curvature_from_jets(finite_difference_jets(m, z));
      EXPECT_LE(rel_diff(cp.R, fd), 1e-6);
      EXPECT_LE(cp.R.conjugate_symmetry_defect(), 1e-12);
    }
  }
}

TEST(Curvature, NonKahlerAndBundleShapesMatchFiniteDifferences) {
  const std::vector<MetricField> ms = {catalog_from_id("hopf:2"), catalog_from_id("fs_perturbed:2:0.05"),
                                       parse_metric(test::kSffRank2), parse_metric(test::kCurveRank2)};
  for (const auto& m : ms)
    for (const CVector& z : test::points(m, 20, 5)) {
      const Tensor4 ad = chern_curvature(m, z).R;
      EXPECT_LE(rel_diff(ad, chern_curvature_from_jets(finite_difference_jets(m, z))), 1e-6) << m.metadata().name;
    }
}

TEST(Curvature, BundleFrameCovariance) {
  const MetricField m = parse_metric(test::kSffRank2);
  Rng rng(8);
  const CMatrix A = test::random_positive(2, rng) + CMatrix::Identity(2, 2) * Complex(0.0, 0.5);
  for (const CVector& z : test::points(m, 10, 9)) {
    const MetricJets j = m.jets(z);
    const Tensor4 R = chern_curvature_from_jets(j);
    const Tensor4 moved = chern_curvature_from_jets(j.congruence(A));
    EXPECT_LE(rel_diff(moved, change_frame(R, CMatrix::Identity(2, 2), A)), 1e-10);

    CurvaturePoint cp = make_curvature_point(R, j, z, true);
    CurvaturePoint cq = cp;
    cq.R = change_frame(R, A, A);
    cq.base_metric = A * cp.base_metric * A.adjoint();
    cq.bundle_metric = cq.base_metric;
    const ScalarPanel p = scalar_panel(cp), q = scalar_panel(cq);
    EXPECT_NEAR(p.s, q.s, 1e-9 * std::max(1.0, std::abs(p.s)));
    EXPECT_NEAR(p.s_hat, q.s_hat, 1e-9 * std::max(1.0, std::abs(p.s_hat)));
  }
}

TEST(ScalarPanel, Values) {
  const ScalarPanel flat = scalar_panel(catalog_from_id("flat:3"), CVector::Zero(3));
  EXPECT_EQ(flat.s, 0.0);
  EXPECT_EQ(flat.s_hat, 0.0);
  EXPECT_EQ(max_abs(flat.ricci1), 0.0);
  EXPECT_EQ(max_abs(flat.ricci2), 0.0);
  const ScalarPanel fs1 = scalar_panel(catalog_from_id("fubini_study:1"), CVector::Zero(1));
  EXPECT_NEAR(fs1.s, 2.0, 1e-12);
  EXPECT_NEAR(fs1.s_hat, 2.0, 1e-12);
  // FS on P^n: s = n(n+1), s_hat = n(n+1)
  const MetricField fs3 = catalog_from_id("fubini_study:3");
  for (const CVector& z : test::points(fs3, 5, 2)) {
    const ScalarPanel p = scalar_panel(fs3, z);
    EXPECT_NEAR(p.s, 12.0, 1e-10);
    EXPECT_NEAR(p.s_hat, 12.0, 1e-10);
  }
  const MetricField hopf = catalog_from_id("hopf:2");
  for (const CVector& z : test::points(hopf, 5, 3)) {
    const ScalarPanel p = scalar_panel(hopf, z);
    EXPECT_GT(std::abs(p.s - p.s_hat), 1e-3);
  }
  EXPECT_THROW(scalar_panel(parse_metric(test::kCurveRank2), CVector::Zero(1)), Error);
}

TEST(Kahler, Verdicts) {
  for (int n = 1; n <= 3; ++n) {
    const MetricField m = catalog_from_id("fubini_study:" + std::to_string(n));
    const KahlerVerdict v = kahler_check(m, test::points(m, 20, 4));
    EXPECT_TRUE(v.kahler);
    EXPECT_LE(v.worst_residual, 1e-10);
  }
  const MetricField flat = catalog_from_id("flat:2");
  EXPECT_EQ(kahler_check(flat, test::points(flat, 5, 4)).worst_residual, 0.0);
  const MetricField hopf = catalog_from_id("hopf:2");
  const CVector unit = (CVector(2) << Complex(0.6, 0.0), Complex(0.0, 0.8)).finished();
  const KahlerVerdict h = kahler_check(hopf, {unit});
  EXPECT_FALSE(h.kahler);
  EXPECT_GT(h.worst_residual, 1e-3);
}

TEST(Kahler, SymmetryAndScalarRelationOnKahlerCatalog) {
  for (const std::string id : {"fubini_study:2", "fubini_study:3", "poincare_disc:2", "flat:3",
                               "product(fubini_study:1,fubini_study:1)", "product(poincare_disc:1,fubini_study:2)",
                               "fs_perturbed:2:0"}) {
    const MetricField m = catalog_from_id(id);
    const auto pts = test::points(m, 100, 21);
    ASSERT_TRUE(kahler_check(m, pts).kahler) << id;
    for (const CVector& z : pts) {
      const CurvaturePoint cp = chern_curvature(m, z);
      EXPECT_LE(curvature_symmetry_residual(cp.R), 1e-8) << id;
      const ScalarPanel p = scalar_panel(cp);
      EXPECT_LE(std::abs(p.s - p.s_hat), 1e-8 * std::max(1.0, cp.R.max_abs())) << id;
    }
  }
  const MetricField hopf = catalog_from_id("hopf:2");
  double worst = 0.0;
  for (const CVector& z : test::points(hopf, 20, 22)) worst = std::max(worst, curvature_symmetry_residual(chern_curvature(hopf, z).R));
  EXPECT_GT(worst, 1e-3);
}

TEST(SphereAverage, ClosedForms) {
  const SphereAverage flat = sphere_average_hsc(chern_curvature(catalog_from_id("flat:3"), CVector::Zero(3)), 1000, 1);
  EXPECT_EQ(flat.mean, 0.0);
  EXPECT_EQ(flat.prediction, 0.0);
  const SphereAverage fs1 = sphere_average_hsc(chern_curvature(catalog_from_id("fubini_study:1"), CVector::Zero(1)), 1000, 1);
  EXPECT_NEAR(fs1.mean, 2.0, 1e-12);
  EXPECT_NEAR(fs1.prediction, 2.0, 1e-12);
  const SphereAverage fs2 = sphere_average_hsc(chern_curvature(catalog_from_id("fubini_study:2"), CVector::Zero(2)), 100000, 11);
  EXPECT_LE(fs2.z_score, 3.0);
  const MetricField hopf = catalog_from_id("hopf:2");
  const SphereAverage h = sphere_average_hsc(chern_curvature(hopf, test::points(hopf, 1, 3)[0]), 100000, 12);
  EXPECT_LE(h.z_score, 4.0);
}
