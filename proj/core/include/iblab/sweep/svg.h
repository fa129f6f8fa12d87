#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iblab/ba/blahut_arimoto.h"
#include "iblab/sweep/pca.h"
#include "iblab/sweep/sweep.h"

namespace iblab {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::string color = "#1f77b4";
  bool line = true;
  bool markers = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<PlotSeries> series;
};

// Self-contained SVG document for a line/scatter plot with a legend.
std::string render_plot(const PlotSpec& spec);

// Raw points, per-beta means and the envelope, with an optional optimal
// reference curve (empty span to omit).
std::string information_plane_svg(std::span<const IBCurvePoint> points, const AggregatedCurve& curve,
                                  std::span<const BACurvePoint> reference = {});
// Two panels side by side: I(X;Z) and I(Z;Y) against beta (log axis).
std::string mi_vs_beta_svg(const AggregatedCurve& curve);
// Scatter of a 2-D projection, one color per label.
std::string pca_scatter_svg(const PcaProjection& projection, std::span<const int> labels, const std::string& title);

}  // namespace iblab
