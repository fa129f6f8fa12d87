#pragma once

#include <span>
#include <vector>

namespace iblab {

struct CurvePoint {
  double beta = 0.0;
  double mi_xz = 0.0;
  double mi_zy = 0.0;
};

struct KneeResult {
  double beta = 0.0;
  double mi_xz = 0.0;
  double mi_zy = 0.0;
  std::size_t index = 0;  // into the curve sorted by mi_xz
  bool low_confidence = false;
  // Normalized distance of every point (sorted by mi_xz) from the chord.
  std::vector<double> chord_distance;
};

/// Kneedle-style knee: both axes are normalized to [0, 1], the points sorted
/// by mi_xz, and the knee is the point farthest from the chord joining the
/// first and last points (ties go to smaller mi_xz). A curve with no point
/// off the chord returns its middle point flagged low-confidence.
KneeResult knee_detect(std::span<const CurvePoint> curve);

}  // namespace iblab
