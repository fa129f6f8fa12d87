#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iblab/rng.h"
#include "iblab/tensor.h"

namespace iblab {

/// Features in [0,1] with integer labels. The synthetic task also carries
/// its exact joint p(x_i, y) (one row per pattern).
struct LabeledDataset {
  std::string name;
  Tensor features;  // [N x d]
  std::vector<int> labels;
  int num_classes = 0;
  std::optional<Tensor> exact_joint;  // [N x num_classes], sums to 1

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  // Throws ErrorKind::kData when an invariant is violated.
  void validate() const;
};

/// Index partition of a dataset. `parts` holds one index list per ratio
/// entry: {train, validation} for 4:1, {train, validation, test} for 4:1:1.
struct SplitIndices {
  std::vector<std::vector<std::size_t>> parts;
  std::vector<double> ratio;
  std::uint64_t seed = 0;

  const std::vector<std::size_t>& train() const { return parts.at(0); }
  const std::vector<std::size_t>& validation() const { return parts.at(1); }
};

/// Seeded shuffle of [0, n) partitioned proportionally to `ratio`. Part
/// sizes are floor(n * r_i / sum r); the remainder goes to the first part.
SplitIndices split(std::size_t n, std::span<const double> ratio, std::uint64_t seed);

struct Batch {
  Tensor features;
  std::vector<int> labels;
  std::vector<std::size_t> indices;
};

Batch make_batch(const LabeledDataset& data, std::span<const std::size_t> indices);

/// Walks `indices` in a per-(seed, epoch) shuffled order, batch_size rows at a
/// time; the final batch may be smaller.
class MinibatchIterator {
 public:
  MinibatchIterator(const LabeledDataset& data, std::span<const std::size_t> indices,
                    std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch);

  bool next(Batch& out);
  std::size_t batch_count() const;

 private:
  const LabeledDataset& data_;
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  std::size_t cursor_ = 0;
};

/// Independent minibatch of m distinct rows drawn from `indices`.
Batch sample_batch(const LabeledDataset& data, std::span<const std::size_t> indices,
                   std::size_t m, Rng& rng);

std::vector<std::size_t> iota_indices(std::size_t n);

}  // namespace iblab
