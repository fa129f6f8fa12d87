#pragma once

#include <array>

#include "iblab/tensor.h"

namespace iblab {

struct PcaProjection {
  Tensor projected;                 // [N x 2]
  std::array<double, 2> variance{};  // variance along each component
  double total_variance = 0.0;
};

/// Mean-centered projection onto the two leading principal directions. Each
/// direction is signed so its largest-magnitude loading is positive. Inputs
/// with a single column are padded with a zero second component.
PcaProjection pca_project_2d(const Tensor& z);

}  // namespace iblab
