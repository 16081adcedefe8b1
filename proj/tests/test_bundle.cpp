#include <gtest/gtest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "rcpos/bundle.hpp"
#include "rcpos/certify.hpp"
#include "support.hpp"

using namespace rcpos;

namespace {

CMatrix random_matrix(int r, Rng& rng) {
  CMatrix x(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) x(a, b) = gaussian_vector(1, rng)[0];
  return x;
}

CMatrix kron_sum(const CMatrix& x, int k) {
  const int r = static_cast<int>(x.rows());
  int dim = 1;
  for (int t = 0; t < k; ++t) dim *= r;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (int slot = 0; slot < k; ++slot) {
    CMatrix term = CMatrix::Ones(1, 1);
    for (int t = 0; t < k; ++t) {
      const CMatrix f = t == slot ? x : CMatrix(CMatrix::Identity(r, r));
      term = Eigen::kroneckerProduct(term, f).eval();
    }
    out += term;
  }
  return out;
}

int permutation_sign(std::vector<int> v) {
  int sign = 1;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (v[i] > v[j]) sign = -sign;
  return sign;
}

int word_index(const std::vector<int>& w, int r) {
  int idx = 0;
  for (int d : w) idx = idx * r + d;
  return idx;
}

// Orthonormal wedge basis e_I = (1/sqrt(p!)) sum_sigma sgn(sigma) e_{I o sigma}, lexicographic I.
CMatrix wedge_basis(int r, int p) {
  const auto subsets = detail::combinations(r, p);
  int dim = 1;
  for (int t = 0; t < p; ++t) dim *= r;
  CMatrix P = CMatrix::Zero(dim, static_cast<Eigen::Index>(subsets.size()));
  double fact = 1.0;
  for (int t = 2; t <= p; ++t) fact *= t;
  for (std::size_t c = 0; c < subsets.size(); ++c) {
    std::vector<int> perm = subsets[c];
    std::vector<int> order(static_cast<std::size_t>(p));
    for (int t = 0; t < p; ++t) order[static_cast<std::size_t>(t)] = t;
    do {
      std::vector<int> w;
      for (int t : order) w.push_back(perm[static_cast<std::size_t>(t)]);
      P(word_index(w, r), static_cast<Eigen::Index>(c)) = permutation_sign(order) / std::sqrt(fact);
    } while (std::next_permutation(order.begin(), order.end()));
  }
  return P;
}

// Orthonormal symmetric basis: normalized sum of all words with a given sorted content.
CMatrix sym_basis(int r, int p) {
  std::map<std::vector<int>, std::vector<int>> groups;
  int dim = 1;
  for (int t = 0; t < p; ++t) dim *= r;
  for (int c = 0; c < dim; ++c) {
    std::vector<int> w(static_cast<std::size_t>(p));
    int rest = c;
    for (int t = p - 1; t >= 0; --t) {
      w[static_cast<std::size_t>(t)] = rest % r;
      rest /= r;
    }
    std::vector<int> key = w;
    std::sort(key.begin(), key.end());
    groups[key].push_back(c);
  }
  CMatrix P = CMatrix::Zero(dim, static_cast<Eigen::Index>(groups.size()));
  int col = 0;
  for (const auto& [key, words] : groups) {
    for (int w : words) P(w, col) = 1.0 / std::sqrt(static_cast<double>(words.size()));
    ++col;
  }
  return P;
}

// -ddbar log phi for a scalar jet phi: curvature of a line metric in a unitary frame.
CMatrix line_curvature(const WirtingerJet& phi) { return -log(phi).dzdzbar; }

WirtingerJet det2(const JetMatrix& h) { return h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0); }

// Unitary invariants of the blocks: traces and pairwise product traces.
std::vector<Complex> block_invariants(const Tensor4& R) {
  std::vector<Complex> out;
  const int n = R.base_dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.push_back(R.block(i, j).trace());
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) out.push_back((R.block(i, j) * R.block(k, l)).trace());
    }
  return out;
}

CurvaturePoint derived(const std::string& expr, const MetricField& m, const CVector& z) {
  return derived_curvature(*parse_bundle(expr), m, z);
}

}  // namespace

TEST(BundleExpr, ParseAndPrint) {
  for (const std::string s : {"tangent", "base", "dual(base)", "ext(tangent,2)", "sym(dual(base),3)",
                              "det(tensor(base,2))", "sub(base,1)", "quot(base,1)"})
    EXPECT_EQ(to_string(*parse_bundle(s)), s);
  EXPECT_EQ(to_string(*parse_bundle(" ext( tangent , 2 ) ")), "ext(tangent,2)");
  EXPECT_THROW(parse_bundle("ext(tangent)"), ParseError);
  EXPECT_THROW(parse_bundle("wedge(base,2)"), ParseError);
  EXPECT_EQ(parse_bundle("sym(base,3)")->rank(2), 4);
  EXPECT_EQ(parse_bundle("ext(base,2)")->rank(4), 6);
  EXPECT_EQ(parse_bundle("tensor(dual(base),3)")->rank(2), 8);
  EXPECT_THROW(parse_bundle("ext(base,3)")->rank(2), Error);
  EXPECT_THROW(parse_bundle("sub(base,2)")->rank(2), Error);
}

TEST(Derivations, TensorPowerIsKroneckerSum) {
  Rng rng(1);
  for (int r = 1; r <= 3; ++r)
    for (int k = 1; k <= 3; ++k) {
      const CMatrix x = random_matrix(r, rng);
      EXPECT_LE((detail::tensor_derivation(x, k) - kron_sum(x, k)).norm(), 1e-12 * x.norm() * k);
    }
}

TEST(Derivations, ExteriorAndSymmetricAreTensorRestrictions) {
  Rng rng(2);
  for (int r = 1; r <= 4; ++r)
    for (int p = 1; p <= r; ++p) {
      const CMatrix x = random_matrix(r, rng);
      const CMatrix P = wedge_basis(r, p);
      ASSERT_LE((P.adjoint() * P - CMatrix::Identity(P.cols(), P.cols())).norm(), 1e-12);
      EXPECT_LE((detail::ext_derivation(x, p) - P.transpose() * kron_sum(x, p) * P).norm(), 1e-12 * x.norm() * p)
          << "r=" << r << " p=" << p;
    }
  for (int r = 1; r <= 3; ++r)
    for (int p = 1; p <= 3; ++p) {
      const CMatrix x = random_matrix(r, rng);
      const CMatrix P = sym_basis(r, p);
      EXPECT_LE((detail::sym_derivation(x, p) - P.transpose() * kron_sum(x, p) * P).norm(), 1e-12 * x.norm() * p)
          << "r=" << r << " p=" << p;
    }
}

TEST(DerivedCurvature, LineBundleIdentities) {
  const MetricField fs1 = catalog_from_id("fubini_study:1");
  const CVector o = CVector::Zero(1);
  EXPECT_NEAR(derived("det(tangent)", fs1, o).R(0, 0, 0, 0).real(), 2.0, 1e-12);
  EXPECT_NEAR(derived("dual(tangent)", fs1, o).R(0, 0, 0, 0).real(), -2.0, 1e-12);
  const MetricField fs2 = catalog_from_id("fubini_study:2");
  for (const CVector& z : test::points(fs2, 5, 3)) {
    const CurvaturePoint t1 = derived("tensor(tangent,1)", fs2, z);
    const CurvaturePoint e1 = derived("ext(tangent,1)", fs2, z);
    const CurvaturePoint d2 = derived("dual(dual(tangent))", fs2, z);
    const CurvaturePoint s1 = derived("sym(tangent,1)", fs2, z);
    EXPECT_EQ(t1.R.data(), e1.R.data());
    EXPECT_EQ(t1.R.data(), s1.R.data());
    EXPECT_LE((t1.R - d2.R).max_abs(), 1e-15);
    // det of the tangent bundle is the first Chern-Ricci form
    const CurvaturePoint det = derived("det(tangent)", fs2, z);
    const ScalarPanel p = scalar_panel(fs2, z);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(det.R(i, j, 0, 0) - p.ricci1(i, j)), 0.0, 1e-12);
  }
}

TEST(DerivedCurvature, DeterminantMatchesLogDet) {
  for (const std::string src : {std::string(test::kSffRank2), std::string(test::kGriffithsRank2), std::string(test::kCurveRank2)}) {
    const MetricField m = parse_metric(src);
    for (const CVector& z : test::points(m, 10, 4)) {
      const CMatrix oracle = line_curvature(det2(m.eval_jet(z)));
      for (const std::string e : {"det(base)", "det(ext(base,2))"}) {
        const CurvaturePoint d = derived(e, m, z);
        for (int i = 0; i < m.base_dim(); ++i)
          for (int j = 0; j < m.base_dim(); ++j) EXPECT_NEAR(std::abs(d.R(i, j, 0, 0) - oracle(i, j)), 0.0, 1e-10) << e;
      }
    }
  }
}

TEST(DerivedCurvature, DualMatchesInverseMetricRoute) {
  for (const std::string src : {std::string(test::kSffRank2), std::string(test::kCurveRank2)}) {
    const MetricField m = parse_metric(src);
    for (const CVector& z : test::points(m, 10, 5)) {
      const JetMatrix hd = inverse(m.eval_jet(z)).transpose();
      const MetricJets dj = MetricJets::from(hd);
      CurvaturePoint direct = make_curvature_point(chern_curvature_from_jets(dj), dj, z, false);
      direct = orthonormal_frames(direct);
      const CurvaturePoint alg = derived("dual(base)", m, z);
      const auto a = block_invariants(direct.R), b = block_invariants(alg.R);
      for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(std::abs(a[k] - b[k]), 0.0, 1e-10 * std::max(1.0, std::abs(a[k])));
    }
  }
}

TEST(DerivedCurvature, ExteriorTraceIdentityAndFunctoriality) {
  const MetricField m = catalog_from_id("fubini_study:3");
  for (const CVector& z : test::points(m, 5, 6)) {
    const CurvaturePoint one = derived("base", m, z);
    const CurvaturePoint on = derived("ext(base,1)", m, z);
    for (int p = 1; p <= 3; ++p) {
      const CurvaturePoint e = derived("ext(base," + std::to_string(p) + ")", m, z);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          EXPECT_NEAR(std::abs(e.R.block(i, j).trace() - binomial(2, p - 1) * on.R.block(i, j).trace()), 0.0, 1e-9);
    }
    EXPECT_LE((derived("det(ext(base,3))", m, z).R - derived("det(base)", m, z).R).max_abs(), 1e-10);
    EXPECT_GT(one.R.max_abs(), 0.0);
  }
}

TEST(DerivedCurvature, RankCapAndShapeErrors) {
  const MetricField m = catalog_from_id("fubini_study:2");
  Tolerances tol;
  tol.rank_cap = 8;
  try {
    derived_curvature(*parse_bundle("tensor(base,4)"), m, CVector::Zero(2), tol);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankOverflow);
  }
  const MetricField line = parse_metric("metric l dim=2 rank=1\nh[1][1] = 1 + absq(z1)\n");
  try {
    derived("tangent", line, CVector::Zero(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankMismatch);
  }
  EXPECT_THROW(derived("sub(base,1)", line, CVector::Zero(2)), Error);
}

TEST(SubQuotient, BlockDiagonalHasNoSecondFundamentalForm) {
  const MetricField m = catalog_from_id("product(fubini_study:1,fubini_study:1)");
  for (const CVector& z : test::points(m, 10, 7)) {
    const MetricJets j = m.jets(z);
    const SubQuotient sq = sub_quotient_curvature(j, 1, j.value, z);
    EXPECT_LE(sq.second_fundamental_residual, 1e-14);
    EXPECT_LE(sq.quotient_residual, 1e-14);
    EXPECT_LE((restrict_bundle(sq.ambient.R, 0, 1) - sq.sub.R).max_abs(), 1e-14);
    EXPECT_LE((restrict_bundle(sq.ambient.R, 1, 1) - sq.quot.R).max_abs(), 1e-14);
  }
  const MetricField flat = parse_metric("metric f dim=1 rank=2\nh[1][1] = 1\nh[2][2] = 1\n");
  EXPECT_EQ(derived("sub(base,1)", flat, CVector::Zero(1)).R.max_abs(), 0.0);
  EXPECT_EQ(derived("quot(base,1)", flat, CVector::Zero(1)).R.max_abs(), 0.0);
}

TEST(SubQuotient, LineOraclesAndMonotonicity) {
  const MetricField m = parse_metric(test::kSffRank2);
  Rng rng(8);
  for (const CVector& z : test::points(m, 50, 9)) {
    const JetMatrix h = m.eval_jet(z);
    const CurvaturePoint sub = derived("sub(base,1)", m, z);
    const CurvaturePoint quot = derived("quot(base,1)", m, z);
    const CMatrix sub_oracle = line_curvature(h(0, 0));
    const CMatrix quot_oracle = line_curvature(det2(h) / h(0, 0));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        EXPECT_NEAR(std::abs(sub.R(i, j, 0, 0) - sub_oracle(i, j)), 0.0, 1e-10);
        EXPECT_NEAR(std::abs(quot.R(i, j, 0, 0) - quot_oracle(i, j)), 0.0, 1e-10);
      }
    const MetricJets j = m.jets(z);
    const SubQuotient sq = sub_quotient_curvature(j, 1, j.value, z);
    EXPECT_LE(sq.second_fundamental_residual, 1e-6);
    EXPECT_LE(sq.quotient_residual, 1e-6);
    const Tensor4 dS = restrict_bundle(sq.ambient.R, 0, 1) - sq.sub.R;
    const Tensor4 dQ = sq.quot.R - restrict_bundle(sq.ambient.R, 1, 1);
    const CVector a = CVector::Ones(1);
    EXPECT_GE(hermitian_eig(hermitian_part(dS.base_form(a))).values[0], -1e-8);
    EXPECT_GE(hermitian_eig(hermitian_part(dQ.base_form(a))).values[0], -1e-8);
  }
}

TEST(Projectivization, FlatPairAndLineCases) {
  const MetricField flat = parse_metric("metric f dim=1 rank=2\nh[1][1] = 1\nh[2][2] = 1\n");
  const CVector a = (CVector(2) << Complex(0.6, 0.0), Complex(0.0, 0.8)).finished();
  const ProjectivizationPoint pp = projectivization_curvature(flat, CVector::Zero(1), a);
  EXPECT_LE(pp.residual, 1e-12);
  EXPECT_EQ(pp.inertia.positive, 1);
  EXPECT_EQ(pp.inertia.zero, 1);
  EXPECT_NEAR(std::abs(pp.direct_original(0, 0)), 0.0, 1e-14);

  const ProjectivizationPoint fs = projectivization_curvature(catalog_from_id("fubini_study:1"), CVector::Zero(1),
                                                              CVector::Ones(1));
  ASSERT_EQ(fs.direct.rows(), 1);
  EXPECT_NEAR(fs.direct(0, 0).real(), 2.0, 1e-12);
  EXPECT_NEAR(fs.block(0, 0).real(), 2.0, 1e-12);
}

TEST(Projectivization, GriffithsPositiveRankTwo) {
  const MetricField m = parse_metric(test::kGriffithsRank2);
  Rng rng(10);
  const auto pts = test::points(m, 50, 11);
  for (const CVector& z : pts) {
    const CurvaturePoint cp = chern_curvature(m, z);
    ASSERT_EQ(certify_griffiths(cp).verdict, Verdict::Certified);
    const ProjectivizationPoint pp = projectivization_curvature(m, z, random_unit_vector(2, rng));
    EXPECT_LE(pp.residual, 1e-6);
    EXPECT_LE(pp.gauge_residual, 1e-8);
    EXPECT_GE(pp.inertia.positive, 2);
  }
}
