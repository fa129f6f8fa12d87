#pragma once

#include <span>
#include <string>
#include <vector>

#include "iblab/mi/estimate.h"
#include "iblab/tensor.h"

namespace iblab {

enum class BandwidthMode { kFixed, kScaledByMedian };

struct KdeConfig {
  BandwidthMode mode = BandwidthMode::kScaledByMedian;
  double scale = 0.1;   // sigma = scale * median pairwise distance
  double sigma = 1.0;   // used when mode == kFixed
  double sigma_floor = 1e-6;

  void validate() const;
};

/// Bandwidth for `z` under `config`. Scaled mode uses the median over all
/// pairs of at most 2000 evenly strided rows. A degenerate median falls back
/// to sigma_floor and appends a warning when `warnings` is non-null.
double kde_bandwidth(const Tensor& z, const KdeConfig& config,
                     std::vector<std::string>* warnings = nullptr);

/// -(1/N) sum_i log (1/N) sum_j exp(-|z_i - z_j|^2 / (2 sigma^2)) in nats,
/// over the listed rows (all rows when `rows` is empty).
double pairwise_entropy_nats(const Tensor& z, double sigma,
                             std::span<const std::size_t> rows = {});

MIEstimate kde_mi_xz(const Tensor& z, const KdeConfig& config = {});

/// I(X;Z) minus the class-weighted within-class pairwise entropies, clamped
/// to the label entropy of the batch.
MIEstimate kde_mi_zy(const Tensor& z, std::span<const int> labels, const KdeConfig& config = {});

}  // namespace iblab
