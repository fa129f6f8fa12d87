#pragma once

#include <cstddef>

#include "iblab/data/dataset.h"
#include "iblab/mi/dv.h"
#include "iblab/params.h"
#include "iblab/train/model.h"
#include "iblab/train/objectives.h"

namespace iblab {

/// Per-sample saliency |d|z_i|^2 / dx_i| on the deterministic path.
Tensor bottleneck_saliency(Model& model, const Tensor& x);

/// Binary mask keeping, in every row, the `pixels` entries of largest
/// saliency (ties go to the lower index).
Tensor top_pixel_mask(const Tensor& saliency, std::size_t pixels);

/// Critic input pairs for one AIB step: the first minibatch masked by its own
/// saliency mask (joint pairs) and the second minibatch masked with the same
/// per-row mask (marginal pairs). Z comes from the first minibatch.
struct AibPairs {
  Tensor mask;
  Tensor joint_x;
  Tensor marginal_x;
};

AibPairs make_aib_pairs(Model& model, const Tensor& x1, const Tensor& x2, std::size_t pixels);

/// Outer objective: cross-entropy of the first minibatch plus beta times the
/// DV expression with the critic held fixed. `dv_out` receives the DV value
/// in nats. When the DV value exceeds ln(m) + 2 the compression term is
/// clipped to a constant and `clipped` is set.
Var aib_outer_loss(Model& model, StatisticNet& critic, Tape& tape, const Batch& batch,
                   const AibPairs& pairs, double beta, double* dv_out = nullptr,
                   bool* clipped = nullptr);

struct AibStepStats {
  double dv_bound = 0.0;        // nats, from the outer step
  double cross_entropy = 0.0;   // nats
  double loss = 0.0;
  bool clipped = false;
};

/// One full update: `inner_steps` ascent steps on the critic, then one
/// descent step on the encoder and decoder.
AibStepStats aib_update(Model& model, StatisticNet& critic, const Batch& first, const Batch& second,
                        const AibObjective& objective, double learning_rate,
                        const AdamConfig& adam = {});

}  // namespace iblab
