#include "iblab/sweep/knee.h"

#include <algorithm>
#include <cmath>

#include "iblab/error.h"

namespace iblab {

namespace {

constexpr double kCollinearTolerance = 1e-9;

}  // namespace

KneeResult knee_detect(std::span<const CurvePoint> curve) {
  if (curve.size() < 3) fail(ErrorKind::kConfig, "knee detection needs at least 3 points");
  std::vector<CurvePoint> pts(curve.begin(), curve.end());
  std::stable_sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) { return a.mi_xz < b.mi_xz; });
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& p : pts) {
    if (!std::isfinite(p.mi_xz) || !std::isfinite(p.mi_zy)) fail(ErrorKind::kNumerical, "curve has a non-finite point");
    x_lo = std::min(x_lo, p.mi_xz);
    x_hi = std::max(x_hi, p.mi_xz);
    y_lo = std::min(y_lo, p.mi_zy);
    y_hi = std::max(y_hi, p.mi_zy);
  }
  const double x_span = x_hi - x_lo, y_span = y_hi - y_lo;
  auto nx = [&](double v) { return x_span > 0.0 ? (v - x_lo) / x_span : 0.0; };
  auto ny = [&](double v) { return y_span > 0.0 ? (v - y_lo) / y_span : 0.0; };

  const double ax = nx(pts.front().mi_xz), ay = ny(pts.front().mi_zy);
  const double bx = nx(pts.back().mi_xz), by = ny(pts.back().mi_zy);
  const double dx = bx - ax, dy = by - ay;
  const double length = std::hypot(dx, dy);

  KneeResult out;
  out.chord_distance.resize(pts.size(), 0.0);
  double best = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double px = nx(pts[i].mi_xz) - ax, py = ny(pts[i].mi_zy) - ay;
    const double d = length > 0.0 ? std::abs(dx * py - dy * px) / length : std::hypot(px, py);
    out.chord_distance[i] = d;
    if (d > best) {
      best = d;
      out.index = i;
    }
  }
  if (best <= kCollinearTolerance) {
    out.index = pts.size() / 2;
    out.low_confidence = true;
  }
  out.beta = pts[out.index].beta;
  out.mi_xz = pts[out.index].mi_xz;
  out.mi_zy = pts[out.index].mi_zy;
  return out;
}

}  // namespace iblab
