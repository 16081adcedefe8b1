#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "certify.hpp"

namespace rcpos {

struct GridResult {
  double value = 0.0;
  CVector argmin;
  int evaluations = 0;
};

/// Brute-force minimum of f over the unit sphere of C^1 or C^2 (up to phase):
/// a (t, phi) grid on (cos t, e^{i phi} sin t), then repeated local zooms
/// around the best few cells. The poles t = 0 and t = pi/2 are one point each
/// up to phase, so they are sampled once and zoomed over the full phi circle.
inline GridResult grid_minimize_cp1(int dim, const std::function<double(const CVector&)>& f, int grid = 100,
                                    int keep = 5, int levels = 40) {
  GridResult out;
  if (dim == 1) {
    out.argmin = CVector::Ones(1);
    out.value = f(out.argmin);
    out.evaluations = 1;
    return out;
  }
  if (dim != 2) throw Error(ErrorCode::DimensionMismatch, "grid oracle covers dimension 1 or 2 only");
  constexpr double pi = std::numbers::pi;
  auto point = [](double t, double phi) {
    CVector v(2);
    v << std::cos(t), std::polar(std::sin(t), phi);
    return v;
  };
  struct Cand {
    double value, t, phi;
  };
  std::vector<Cand> all;
  const double dt = (pi / 2) / (grid - 1), dphi = 2 * pi / grid;
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b) {
      if ((a == 0 || a == grid - 1) && b > 0) continue;
      const double t = a == grid - 1 ? pi / 2 : a * dt, phi = b * dphi;
      all.push_back({f(point(t, phi)), t, phi});
    }
  out.evaluations = static_cast<int>(all.size());
  std::stable_sort(all.begin(), all.end(), [](const Cand& x, const Cand& y) { return x.value < y.value; });
  Cand best = all.front();
  const int k_keep = std::min<int>(keep, static_cast<int>(all.size()));
  for (int k = 0; k < k_keep; ++k) {
    Cand c = all[static_cast<std::size_t>(k)];
    double wt = dt, wp = (c.t == 0.0 || c.t == pi / 2) ? pi : dphi;
    for (int level = 0; level < levels; ++level) {
      Cand local = c;
      for (int a = -5; a <= 5; ++a)
        for (int b = -5; b <= 5; ++b) {
          const double t = std::clamp(c.t + a * wt / 5, 0.0, pi / 2), phi = c.phi + b * wp / 5;
          const double v = f(point(t, phi));
          ++out.evaluations;
          if (v < local.value) local = {v, t, phi};
        }
      c = local;
      wt *= 0.5;
      wp *= 0.5;
    }
    if (c.value < best.value) best = c;
  }
  out.value = best.value;
  out.argmin = point(best.t, best.phi);
  return out;
}

/// Grid estimate of the rc+ (sign = 1) or rc- (sign = -1) margin on the same
/// normalized scale as the certificate, for rank <= 2.
inline GridResult grid_rc_margin(const CurvaturePoint& cp, double sign = 1.0,
                                 const Tolerances& tol = default_tolerances()) {
  const detail::Normalized N = detail::normalize(cp, sign, tol);
  return grid_minimize_cp1(cp.rank(), [&](const CVector& a) { return detail::top_eigenvalue(N.R.base_form(a), tol); });
}

/// Grid estimate of min H over the g-unit sphere in raw units, for n <= 2.
inline GridResult grid_hsc_min(const CurvaturePoint& cp, const Tolerances& tol = default_tolerances()) {
  const CurvaturePoint on = orthonormal_tangent_frame(cp, nullptr, tol);
  return grid_minimize_cp1(cp.base_dim(), [&](const CVector& x) { return on.R.evaluate(x, x).real(); });
}

}  // namespace rcpos
