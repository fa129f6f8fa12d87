#include "iblab/sweep/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "iblab/error.h"

namespace iblab {

namespace {

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 150.0, kTop = 40.0, kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Draws one plot into `out` inside the box starting at (ox, oy).
void draw_plot(std::ostringstream& out, const PlotSpec& spec, double ox, double oy) {
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
  for (const auto& s : spec.series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y) || (spec.log_x && x <= 0.0)) continue;
      x_lo = std::min(x_lo, tx(x));
      x_hi = std::max(x_hi, tx(x));
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (x_hi == x_lo) x_lo -= 0.5, x_hi += 0.5;
  if (y_hi == y_lo) y_lo -= 0.5, y_hi += 0.5;
  const double pad_y = 0.05 * (y_hi - y_lo);
  y_lo -= pad_y;
  y_hi += pad_y;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return ox + kLeft + (tx(x) - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return oy + kTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

  out << "<text x=\"" << num(ox + kWidth / 2) << "\" y=\"" << num(oy + 24)
      << "\" text-anchor=\"middle\" font-size=\"16\">" << escape(spec.title) << "</text>\n";
  out << "<rect x=\"" << num(ox + kLeft) << "\" y=\"" << num(oy + kTop) << "\" width=\"" << num(pw) << "\" height=\""
      << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_lo + (x_hi - x_lo) * i / 4.0;
    const double xv = spec.log_x ? std::pow(10.0, fx) : fx;
    const double sx = ox + kLeft + pw * i / 4.0;
    out << "<text x=\"" << num(sx) << "\" y=\"" << num(oy + kTop + ph + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(xv) << "</text>\n";
    const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
    out << "<text x=\"" << num(ox + kLeft - 6) << "\" y=\"" << num(py(yv) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(yv) << "</text>\n";
  }
  out << "<text x=\"" << num(ox + kLeft + pw / 2) << "\" y=\"" << num(oy + kHeight - 16)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(spec.x_label) << "</text>\n";
  out << "<text transform=\"translate(" << num(ox + 18) << "," << num(oy + kTop + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" << escape(spec.y_label) << "</text>\n";

  double legend_y = oy + kTop + 10;
  for (const auto& s : spec.series) {
    std::ostringstream path;
    bool first = true;
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y) || (spec.log_x && x <= 0.0)) continue;
      path << (first ? "M" : " L") << num(px(x)) << " " << num(py(y));
      first = false;
      if (s.markers) {
        out << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"2.5\" fill=\"" << s.color
            << "\"/>\n";
      }
    }
    if (s.line && !first) {
      out << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"/>\n";
    }
    if (!s.label.empty()) {
      out << "<rect x=\"" << num(ox + kWidth - kRight + 10) << "\" y=\"" << num(legend_y - 8)
          << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n";
      out << "<text x=\"" << num(ox + kWidth - kRight + 26) << "\" y=\"" << num(legend_y + 1)
          << "\" font-size=\"11\">" << escape(s.label) << "</text>\n";
      legend_y += 16;
    }
  }
}

std::string document(double width, double height, const std::string& body) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body << "</svg>\n";
  return out.str();
}

}  // namespace

std::string render_plot(const PlotSpec& spec) {
  std::ostringstream body;
  draw_plot(body, spec, 0.0, 0.0);
  return document(kWidth, kHeight, body.str());
}

std::string information_plane_svg(std::span<const IBCurvePoint> points, const AggregatedCurve& curve,
                                  std::span<const BACurvePoint> reference) {
  PlotSpec spec{"Information plane", "I(X;Z) [bits]", "I(Z;Y) [bits]", false, {}};
  if (!reference.empty()) {
    PlotSeries ref{"optimal (BA)", {}, "#7f7f7f", true, false};
    for (const auto& p : reference) ref.points.emplace_back(p.mi_xz_bits, p.mi_zy_bits);
    spec.series.push_back(ref);
  }
  PlotSeries raw{"models", {}, "#9ecae1", false, true};
  for (const auto& p : points) {
    if (p.ok()) raw.points.emplace_back(p.mi_xz_bits, p.mi_zy_bits);
  }
  spec.series.push_back(raw);
  PlotSeries means{"per-beta mean", {}, "#1f77b4", false, true};
  for (const auto& m : curve.means) means.points.emplace_back(m.mi_xz_bits, m.mi_zy_bits);
  spec.series.push_back(means);
  PlotSeries env{"envelope", {}, "#d62728", true, false};
  for (const auto& p : curve.envelope) env.points.emplace_back(p.mi_xz, p.mi_zy);
  spec.series.push_back(env);
  return render_plot(spec);
}

std::string mi_vs_beta_svg(const AggregatedCurve& curve) {
  PlotSpec left{"I(X;Z) vs beta", "beta", "I(X;Z) [bits]", true, {}};
  PlotSpec right{"I(Z;Y) vs beta", "beta", "I(Z;Y) [bits]", true, {}};
  PlotSeries xz{"mean", {}, "#1f77b4", true, true};
  PlotSeries zy{"mean", {}, "#ff7f0e", true, true};
  for (const auto& m : curve.means) {
    xz.points.emplace_back(m.beta, m.mi_xz_bits);
    zy.points.emplace_back(m.beta, m.mi_zy_bits);
  }
  left.series.push_back(xz);
  right.series.push_back(zy);
  std::ostringstream body;
  draw_plot(body, left, 0.0, 0.0);
  draw_plot(body, right, kWidth, 0.0);
  return document(2 * kWidth, kHeight, body.str());
}

std::string pca_scatter_svg(const PcaProjection& projection, std::span<const int> labels, const std::string& title) {
  if (labels.size() != projection.projected.rows()) fail(ErrorKind::kData, "one label per projected row required");
  PlotSpec spec{title, "PC1", "PC2", false, {}};
  std::map<int, PlotSeries> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(labels[i]);
    if (inserted) {
      it->second.label = "class " + std::to_string(labels[i]);
      it->second.color = kPalette[static_cast<std::size_t>(std::abs(labels[i])) % 10];
      it->second.line = false;
    }
    it->second.points.emplace_back(projection.projected(i, 0), projection.projected(i, 1));
  }
  for (auto& [label, s] : groups) spec.series.push_back(std::move(s));
  return render_plot(spec);
}

}  // namespace iblab
