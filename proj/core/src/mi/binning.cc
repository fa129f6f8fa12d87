#include "iblab/mi/binning.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "iblab/error.h"
#include "iblab/info.h"

namespace iblab {

namespace {

std::vector<int> dense_codes(std::span<const int> values) {
  std::map<int, int> ids;
  std::vector<int> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = ids.emplace(values[i], static_cast<int>(ids.size())).first->second;
  }
  return out;
}

MIEstimate plug_in(std::span<const int> a, std::span<const int> b, std::span<const double> weights,
                   int bins) {
  if (a.size() != b.size()) fail(ErrorKind::kData, "binning: inputs differ in length");
  if (!weights.empty() && weights.size() != a.size()) fail(ErrorKind::kData, "binning: weight count mismatch");
  if (a.empty()) fail(ErrorKind::kData, "binning: empty sample");
  const auto da = dense_codes(a);
  const auto db = dense_codes(b);
  const int na = *std::max_element(da.begin(), da.end()) + 1;
  const int nb = *std::max_element(db.begin(), db.end()) + 1;
  // Sparse joint: row count can reach N, so avoid an na x nb table.
  std::map<std::pair<int, int>, double> joint;
  std::vector<double> pa(na, 0.0), pb(nb, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w < 0.0) fail(ErrorKind::kData, "binning: negative weight");
    joint[{da[i], db[i]}] += w;
    pa[da[i]] += w;
    pb[db[i]] += w;
    total += w;
  }
  if (!(total > 0.0)) fail(ErrorKind::kData, "binning: weights sum to zero");
  double mi = 0.0;
  for (const auto& [key, w] : joint) {
    if (w <= 0.0) continue;
    mi += (w / total) * std::log2(w * total / (pa[key.first] * pb[key.second]));
  }
  return make_estimate(MiMethod::kBinning, mi, {{"bins", bins}, {"samples", a.size()}});
}

}  // namespace

std::vector<int> bin_codes(const Tensor& a, int bins) {
  if (bins < 2) fail(ErrorKind::kConfig, "binning needs at least 2 bins");
  const std::size_t n = a.rows(), d = a.cols();
  std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], a(i, k));
      hi[k] = std::max(hi[k], a(i, k));
    }
  }
  std::map<std::vector<int>, int> ids;
  std::vector<int> codes(n);
  std::vector<int> key(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double width = hi[k] - lo[k];
      int bin = 0;
      if (width > 0.0) {
        bin = static_cast<int>(std::floor((a(i, k) - lo[k]) / width * bins));
        bin = std::clamp(bin, 0, bins - 1);
      }
      key[k] = bin;
    }
    codes[i] = ids.emplace(key, static_cast<int>(ids.size())).first->second;
  }
  return codes;
}

MIEstimate binning_mi(const Tensor& a, std::span<const int> b, int bins, std::span<const double> weights) {
  const auto codes = bin_codes(a, bins);
  return plug_in(codes, b, weights, bins);
}

MIEstimate binning_mi(const Tensor& a, const Tensor& b, int bins) {
  const auto ca = bin_codes(a, bins);
  const auto cb = bin_codes(b, bins);
  return plug_in(ca, cb, {}, bins);
}

}  // namespace iblab
