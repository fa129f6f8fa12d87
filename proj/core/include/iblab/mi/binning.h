#pragma once

#include <span>
#include <vector>

#include "iblab/mi/estimate.h"
#include "iblab/tensor.h"

namespace iblab {

inline constexpr int kDefaultBins = 30;

// Discretizes each column into `bins` uniform bins over its observed range
// and returns one dense code per row (equal rows share a code).
std::vector<int> bin_codes(const Tensor& a, int bins);

/// Plug-in MI between binned rows of `a` and discrete labels `b`. Optional
/// per-row weights turn the empirical joint into a weighted one (used to feed
/// an exact joint enumerated row by row).
MIEstimate binning_mi(const Tensor& a, std::span<const int> b, int bins = kDefaultBins,
                      std::span<const double> weights = {});

// Both sides binned.
MIEstimate binning_mi(const Tensor& a, const Tensor& b, int bins = kDefaultBins);

}  // namespace iblab
