#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "metric.hpp"
#include "sphere.hpp"
#include "tensor4.hpp"

namespace rcpos {

/// Chern curvature of a Hermitian bundle at one chart point, together with the
/// metric values needed to read it (base g_{i jbar}, bundle h_{alpha betabar}).
struct CurvaturePoint {
  Tensor4 R;
  CMatrix base_metric;
  CMatrix bundle_metric;
  CVector point;
  bool kahler_verified = false;

  int base_dim() const noexcept { return R.base_dim(); }
  int rank() const noexcept { return R.rank(); }
};

/// R_{i jbar alpha betabar} = -d_i dbar_j h + (d_i h) h^{-1} (dbar_j h), in matrix form per (i, j).
inline Tensor4 chern_curvature_from_jets(const MetricJets& jets) {
  const int n = jets.n, r = jets.r;
  const CMatrix hinv = hermitian_inverse(jets.value);
  Tensor4 R(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R.set_block(i, j, -jets.mixed(i, j) + jets.dz[i] * hinv * jets.dzbar[j]);
  return R;
}

inline CurvaturePoint make_curvature_point(Tensor4 R, const MetricJets& jets, const CVector& z, bool tangent) {
  CurvaturePoint cp;
  cp.R = std::move(R);
  cp.bundle_metric = jets.value;
  cp.base_metric = tangent ? jets.value : CMatrix(CMatrix::Identity(jets.n, jets.n));
  cp.point = z;
  return cp;
}

/// Chern curvature of the metric's own bundle at z. For rank == dim the bundle is
/// the tangent bundle and the base metric is h itself; otherwise the base carries
/// the Euclidean coordinate metric.
inline CurvaturePoint chern_curvature(const MetricField& m, const CVector& z, const Tolerances& tol = default_tolerances()) {
  const MetricJets jets = m.jets(z, tol);
  return make_curvature_point(chern_curvature_from_jets(jets), jets, z, m.is_tangent());
}

struct ScalarPanel {
  double s = 0.0;      // Chern scalar curvature g^{i jbar} R_{i jbar}
  double s_hat = 0.0;  // g^{i lbar} g^{k jbar} R_{i jbar k lbar}
  CMatrix ricci1;      // R_{i jbar} = g^{k lbar} R_{i jbar k lbar}
  CMatrix ricci2;      // R^{(2)}_{k lbar} = g^{i jbar} R_{i jbar k lbar}
};

/// Index convention: g^{a bbar} is entry (b, a) of the matrix inverse of g.
inline ScalarPanel scalar_panel(const CurvaturePoint& cp) {
  const int n = cp.base_dim();
  if (cp.rank() != n) throw Error(ErrorCode::RankMismatch, "scalar curvatures need the tangent bundle (rank == dim)");
  const CMatrix ginv = hermitian_inverse(cp.base_metric);
  const Tensor4& R = cp.R;
  ScalarPanel p;
  p.ricci1 = CMatrix::Zero(n, n);
  p.ricci2 = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          p.ricci1(i, j) += ginv(l, k) * R(i, j, k, l);
          p.ricci2(k, l) += ginv(j, i) * R(i, j, k, l);
        }
  Complex s{}, s_hat{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += ginv(j, i) * p.ricci1(i, j);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) s_hat += ginv(l, i) * ginv(j, k) * R(i, j, k, l);
  p.s = s.real();
  p.s_hat = s_hat.real();
  return p;
}

inline ScalarPanel scalar_panel(const MetricField& m, const CVector& z, const Tolerances& tol = default_tolerances()) {
  if (!m.is_tangent()) throw Error(ErrorCode::RankMismatch, "scalar curvatures need rank == dim");
  return scalar_panel(chern_curvature(m, z, tol));
}

/// max_{i,k,l} |d_i g_{k lbar} - d_k g_{i lbar}| relative to max |g|: zero iff
/// the fundamental form is closed at the point.
inline double kahler_residual(const MetricJets& jets) {
  const int n = jets.n;
  if (jets.r != n) throw Error(ErrorCode::RankMismatch, "Kahler test needs rank == dim");
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) worst = std::max(worst, std::abs(jets.dz[i](k, l) - jets.dz[k](i, l)));
  const double scale = max_abs(jets.value);
  return scale > 0.0 ? worst / scale : worst;
}

/// max |R_{i jbar k lbar} - R_{k jbar i lbar}| relative to max |R| (0 for R = 0).
inline double curvature_symmetry_residual(const Tensor4& R) {
  const int n = R.base_dim();
  if (R.rank() != n) throw Error(ErrorCode::RankMismatch, "curvature symmetry needs rank == dim");
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) worst = std::max(worst, std::abs(R(i, j, k, l) - R(k, j, i, l)));
  const double scale = R.max_abs();
  return scale > 0.0 ? worst / scale : worst;
}

struct KahlerVerdict {
  bool kahler = true;
  double worst_residual = 0.0;
  CVector worst_point;
  int points_checked = 0;
};

inline KahlerVerdict kahler_check(const MetricField& g, const std::vector<CVector>& points,
                                  const Tolerances& tol = default_tolerances()) {
  if (!g.is_tangent()) throw Error(ErrorCode::RankMismatch, "Kahler test needs rank == dim");
  KahlerVerdict v;
  for (const auto& z : points) {
    const double res = kahler_residual(g.jets(z, tol));
    if (v.points_checked == 0 || res > v.worst_residual) {
      v.worst_residual = res;
      v.worst_point = z;
    }
    ++v.points_checked;
  }
  v.kahler = v.worst_residual <= tol.kahler;
  return v;
}

/// Same tangent frame change S (with S g S* = I) applied to base and bundle slots.
inline CurvaturePoint orthonormal_tangent_frame(const CurvaturePoint& cp, CMatrix* frame_out = nullptr,
                                                const Tolerances& tol = default_tolerances()) {
  if (cp.rank() != cp.base_dim()) throw Error(ErrorCode::RankMismatch, "tangent frame change needs rank == dim");
  const CMatrix S = orthonormalizing_frame(cp.base_metric, tol);
  CurvaturePoint out = cp;
  out.R = change_frame(cp.R, S, S);
  out.base_metric = CMatrix::Identity(cp.base_dim(), cp.base_dim());
  out.bundle_metric = out.base_metric;
  if (frame_out) *frame_out = S;
  return out;
}

/// Independent base and bundle frame changes making both metrics the identity.
inline CurvaturePoint orthonormal_frames(const CurvaturePoint& cp, CMatrix* base_frame = nullptr,
                                         CMatrix* bundle_frame = nullptr, const Tolerances& tol = default_tolerances()) {
  const CMatrix Sg = orthonormalizing_frame(cp.base_metric, tol);
  const CMatrix Sh = orthonormalizing_frame(cp.bundle_metric, tol);
  CurvaturePoint out = cp;
  out.R = change_frame(cp.R, Sg, Sh);
  out.base_metric = CMatrix::Identity(cp.base_dim(), cp.base_dim());
  out.bundle_metric = CMatrix::Identity(cp.rank(), cp.rank());
  if (base_frame) *base_frame = Sg;
  if (bundle_frame) *bundle_frame = Sh;
  return out;
}

struct SphereAverage {
  double mean = 0.0;
  double prediction = 0.0;  // (s + s_hat) / (n (n + 1))
  double std_error = 0.0;
  double z_score = 0.0;
  int samples = 0;
};

/// Monte-Carlo mean of the holomorphic sectional curvature over the unit sphere
/// of an orthonormalized tangent frame, against the closed-form scalar prediction.
inline SphereAverage sphere_average_hsc(const CurvaturePoint& cp, int samples, std::uint64_t seed,
                                        const Tolerances& tol = default_tolerances()) {
  const int n = cp.base_dim();
  const CurvaturePoint on = orthonormal_tangent_frame(cp, nullptr, tol);
  const ScalarPanel panel = scalar_panel(cp);
  const auto xs = sample_unit_sphere(n, samples, seed);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& x : xs) {
    const double h = on.R.evaluate(x.components(), x.components()).real();
    sum += h;
    sum_sq += h * h;
  }
  SphereAverage out;
  out.samples = samples;
  out.mean = sum / samples;
  const double var = samples > 1 ? std::max(0.0, (sum_sq - samples * out.mean * out.mean) / (samples - 1)) : 0.0;
  out.std_error = std::sqrt(var / samples);
  out.prediction = (panel.s + panel.s_hat) / (n * (n + 1.0));
  // A constant integrand has zero spread; floor the error at rounding level.
  const double floor = 1e-12 * std::max({std::abs(out.prediction), on.R.max_abs(), 1e-300});
  out.z_score = std::abs(out.mean - out.prediction) / std::max(out.std_error, floor);
  return out;
}

}  // namespace rcpos
