#include "iblab/mi/kde.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "iblab/error.h"
#include "iblab/info.h"

namespace iblab {

namespace {

constexpr std::size_t kMedianSampleRows = 2000;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

nlohmann::json config_json(const KdeConfig& config, double sigma) {
  return {{"bandwidth_mode", config.mode == BandwidthMode::kFixed ? "fixed" : "scaled_by_median"},
          {"scale", config.scale},
          {"sigma", sigma}};
}

}  // namespace

void KdeConfig::validate() const {
  if (!(scale > 0.0)) fail(ErrorKind::kConfig, "KDE scale must be positive");
  if (mode == BandwidthMode::kFixed && !(sigma > 0.0)) fail(ErrorKind::kConfig, "KDE sigma must be positive");
  if (!(sigma_floor > 0.0)) fail(ErrorKind::kConfig, "KDE sigma floor must be positive");
}

double kde_bandwidth(const Tensor& z, const KdeConfig& config, std::vector<std::string>* warnings) {
  config.validate();
  if (config.mode == BandwidthMode::kFixed) return config.sigma;
  const std::size_t n = z.rows();
  std::vector<std::size_t> rows;
  const std::size_t stride = std::max<std::size_t>(1, (n + kMedianSampleRows - 1) / kMedianSampleRows);
  for (std::size_t i = 0; i < n; i += stride) rows.push_back(i);
  std::vector<double> dist;
  dist.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b)
      dist.push_back(std::sqrt(squared_distance(z.row(rows[a]), z.row(rows[b]))));
  double median = 0.0;
  if (!dist.empty()) {
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    median = *mid;
  }
  const double sigma = config.scale * median;
  if (!(sigma >= config.sigma_floor)) {
    if (warnings) warnings->push_back("degenerate pairwise distances; bandwidth floored to sigma_floor");
    return config.sigma_floor;
  }
  return sigma;
}

double pairwise_entropy_nats(const Tensor& z, double sigma, std::span<const std::size_t> rows) {
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(z.rows());
    std::iota(all.begin(), all.end(), 0);
    rows = all;
  }
  const std::size_t m = rows.size();
  if (m == 0) fail(ErrorKind::kData, "pairwise entropy of an empty set");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  // The diagonal term is exp(0) = 1, and every other term is <= 1, so the
  // inner sum never underflows to zero.
  std::vector<double> inner(m, 1.0);
  for (std::size_t a = 0; a < m; ++a) {
    const auto za = z.row(rows[a]);
    for (std::size_t b = a + 1; b < m; ++b) {
      const double k = std::exp(-squared_distance(za, z.row(rows[b])) * inv);
      inner[a] += k;
      inner[b] += k;
    }
  }
  double total = 0.0;
  for (double s : inner) total += std::log(s / static_cast<double>(m));
  return -total / static_cast<double>(m);
}

MIEstimate kde_mi_xz(const Tensor& z, const KdeConfig& config) {
  if (z.rows() < 2) fail(ErrorKind::kData, "KDE needs at least two samples");
  std::vector<std::string> warnings;
  const double sigma = kde_bandwidth(z, config, &warnings);
  MIEstimate e = make_estimate(MiMethod::kKde, info::nats_to_bits(pairwise_entropy_nats(z, sigma)),
                               config_json(config, sigma));
  e.warnings = std::move(warnings);
  return e;
}

MIEstimate kde_mi_zy(const Tensor& z, std::span<const int> labels, const KdeConfig& config) {
  if (z.rows() < 2) fail(ErrorKind::kData, "KDE needs at least two samples");
  if (labels.size() != z.rows()) fail(ErrorKind::kData, "labels and activations differ in length");
  std::vector<std::string> warnings;
  const double sigma = kde_bandwidth(z, config, &warnings);
  std::map<int, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < labels.size(); ++i) classes[labels[i]].push_back(i);
  const double n = static_cast<double>(z.rows());
  const double marginal = pairwise_entropy_nats(z, sigma);
  double conditional = 0.0;
  for (const auto& [label, rows] : classes) {
    if (rows.size() < 2) {
      warnings.push_back("class " + std::to_string(label) + " has a single sample");
      continue;
    }
    conditional += static_cast<double>(rows.size()) / n * pairwise_entropy_nats(z, sigma, rows);
  }
  const double h_y = label_entropy(labels);
  const double raw = info::nats_to_bits(marginal - conditional);
  auto params = config_json(config, sigma);
  params["label_entropy_bits"] = h_y;
  MIEstimate e = make_estimate(MiMethod::kKde, raw, params);
  e.value_bits = std::min(e.value_bits, h_y);
  e.warnings = std::move(warnings);
  return e;
}

}  // namespace iblab
