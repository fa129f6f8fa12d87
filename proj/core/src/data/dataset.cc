#include "iblab/data/dataset.h"

#include <cmath>
#include <cstring>
#include <numeric>

#include "iblab/error.h"

namespace iblab {

void LabeledDataset::validate() const {
  const std::size_t n = labels.size();
  if (n == 0) fail(ErrorKind::kData, name + ": dataset is empty");
  if (features.rank() != 2 || features.rows() != n) {
    fail(ErrorKind::kData, name + ": feature rows do not match label count");
  }
  if (num_classes <= 0) fail(ErrorKind::kData, name + ": num_classes must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      fail(ErrorKind::kData, name + ": label " + std::to_string(labels[i]) + " at row " +
                                 std::to_string(i) + " outside [0, " +
                                 std::to_string(num_classes) + ")");
    }
  }
  for (double v : features.data()) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::kData, name + ": feature value outside [0,1]");
  }
  if (exact_joint) {
    const Tensor& j = *exact_joint;
    if (j.rows() != n || j.cols() != static_cast<std::size_t>(num_classes)) {
      fail(ErrorKind::kData, name + ": exact joint has wrong shape " + j.shape_string());
    }
    double total = 0.0;
    for (double v : j.data()) {
      if (v < 0.0) fail(ErrorKind::kData, name + ": exact joint has a negative entry");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::kData, name + ": exact joint does not sum to 1");
  }
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

SplitIndices split(std::size_t n, std::span<const double> ratio, std::uint64_t seed) {
  if (ratio.size() < 2) fail(ErrorKind::kConfig, "split ratio needs at least two parts");
  double total = 0.0;
  for (double r : ratio) {
    if (!(r > 0.0)) fail(ErrorKind::kConfig, "split ratio entries must be positive");
    total += r;
  }
  std::vector<std::size_t> order = iota_indices(n);
  Rng rng(Rng::derive(seed, 0x5b117));
  rng.shuffle(std::span(order));

  std::vector<std::size_t> sizes(ratio.size());
  std::size_t assigned = 0;
  for (std::size_t i = 1; i < ratio.size(); ++i) {
    sizes[i] = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio[i] / total));
    assigned += sizes[i];
  }
  sizes[0] = n - assigned;

  SplitIndices out;
  out.ratio.assign(ratio.begin(), ratio.end());
  out.seed = seed;
  std::size_t cursor = 0;
  for (std::size_t size : sizes) {
    out.parts.emplace_back(order.begin() + cursor, order.begin() + cursor + size);
    cursor += size;
  }
  return out;
}

Batch make_batch(const LabeledDataset& data, std::span<const std::size_t> indices) {
  Batch b;
  b.features = data.features.gather_rows(indices);
  b.labels.reserve(indices.size());
  for (std::size_t i : indices) b.labels.push_back(data.labels[i]);
  b.indices.assign(indices.begin(), indices.end());
  return b;
}

MinibatchIterator::MinibatchIterator(const LabeledDataset& data,
                                     std::span<const std::size_t> indices,
                                     std::size_t batch_size, std::uint64_t seed,
                                     std::uint64_t epoch)
    : data_(data), order_(indices.begin(), indices.end()), batch_size_(batch_size) {
  if (batch_size == 0) fail(ErrorKind::kConfig, "batch size must be at least 1");
  Rng rng(Rng::derive(seed, 0xba7c4, epoch));
  rng.shuffle(std::span(order_));
}

std::size_t MinibatchIterator::batch_count() const {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

bool MinibatchIterator::next(Batch& out) {
  if (cursor_ >= order_.size()) return false;
  const std::size_t end = std::min(order_.size(), cursor_ + batch_size_);
  out = make_batch(data_, std::span(order_).subspan(cursor_, end - cursor_));
  cursor_ = end;
  return true;
}

Batch sample_batch(const LabeledDataset& data, std::span<const std::size_t> indices,
                   std::size_t m, Rng& rng) {
  if (m == 0 || m > indices.size()) fail(ErrorKind::kConfig, "sample_batch: bad batch size");
  // Partial Fisher-Yates over a copy: m distinct draws.
  std::vector<std::size_t> pool(indices.begin(), indices.end());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  return make_batch(data, std::span(pool).first(m));
}

}  // namespace iblab
