#include "iblab/train/aib.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iblab/error.h"
#include "iblab/ops.h"

namespace iblab {

namespace {

Tensor masked(const Tensor& x, const Tensor& mask) {
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return out;
}

}  // namespace

Tensor bottleneck_saliency(Model& model, const Tensor& x) {
  Tape tape;
  Var input = tape.input(x);
  ForwardOptions options;
  options.trainable = false;
  auto r = model.forward(tape, input, options);
  tape.backward(ops::sum(ops::mul(r.z_clean, r.z_clean)));
  Tensor s = input.has_grad() ? input.grad() : Tensor(x.shape());
  for (double& v : s.data()) v = std::abs(v);
  return s;
}

Tensor top_pixel_mask(const Tensor& saliency, std::size_t pixels) {
  const std::size_t n = saliency.rows(), d = saliency.cols();
  if (pixels == 0 || pixels > d) fail(ErrorKind::kConfig, "pixel count must lie in [1, input width]");
  Tensor mask(saliency.shape(), 0.0);
  if (pixels == d) {
    mask.fill(1.0);
    return mask;
  }
  std::vector<std::size_t> order(d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto s = saliency.row(r);
    std::iota(order.begin(), order.end(), 0);
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pixels) - 1, order.end(),
                     [&s](std::size_t a, std::size_t b) { return s[a] > s[b] || (s[a] == s[b] && a < b); });
    for (std::size_t k = 0; k < pixels; ++k) mask(r, order[k]) = 1.0;
  }
  return mask;
}

AibPairs make_aib_pairs(Model& model, const Tensor& x1, const Tensor& x2, std::size_t pixels) {
  if (!x1.same_shape(x2)) fail(ErrorKind::kUsage, "AIB minibatches must have equal shapes");
  AibPairs p;
  p.mask = top_pixel_mask(bottleneck_saliency(model, x1), pixels);
  p.joint_x = masked(x1, p.mask);
  p.marginal_x = masked(x2, p.mask);
  return p;
}

Var aib_outer_loss(Model& model, StatisticNet& critic, Tape& tape, const Batch& batch, const AibPairs& pairs,
                   double beta, double* dv_out, bool* clipped) {
  auto r = model.forward(tape, tape.constant(batch.features));
  Var ce = ops::softmax_cross_entropy(r.logits, batch.labels);
  if (clipped) *clipped = false;
  if (beta == 0.0) {
    if (dv_out) *dv_out = dv_bound_value(critic.evaluate(pairs.joint_x, r.z.value()),
                                         critic.evaluate(pairs.marginal_x, r.z.value()));
    return ce;
  }
  Var t_joint = critic.forward(tape, tape.constant(pairs.joint_x), r.z, false);
  Var t_marginal = critic.forward(tape, tape.constant(pairs.marginal_x), r.z, false);
  Var dv = dv_bound(t_joint, t_marginal);
  const double value = dv.value()[0];
  if (dv_out) *dv_out = value;
  const double cap = std::log(static_cast<double>(batch.labels.size())) + 2.0;
  if (value > cap) {
    if (clipped) *clipped = true;
    return ce;
  }
  return ops::add(ce, ops::scale(dv, beta));
}

AibStepStats aib_update(Model& model, StatisticNet& critic, const Batch& first, const Batch& second,
                        const AibObjective& objective, double learning_rate, const AdamConfig& adam) {
  const AibPairs pairs = make_aib_pairs(model, first.features, second.features,
                                        objective.pixel_count(model.spec().input_dim()));
  const Tensor z = model.forward_bottleneck(first.features).first;
  const double critic_lr = objective.critic_learning_rate > 0.0 ? objective.critic_learning_rate : learning_rate;
  for (int k = 0; k < objective.inner_steps; ++k) {
    Tape tape;
    Var zc = tape.constant(z);
    Var bound = dv_bound(critic.forward(tape, tape.constant(pairs.joint_x), zc),
                         critic.forward(tape, tape.constant(pairs.marginal_x), zc));
    tape.backward(ops::scale(bound, -1.0));
    adam_step(critic.params(), critic_lr, adam);
  }
  AibStepStats stats;
  Tape tape;
  Var loss = aib_outer_loss(model, critic, tape, first, pairs, objective.beta, &stats.dv_bound, &stats.clipped);
  stats.loss = loss.value()[0];
  tape.backward(loss);
  adam_step(model.params(), learning_rate, adam);
  const bool compressed = objective.beta != 0.0 && !stats.clipped;
  stats.cross_entropy = compressed ? stats.loss - objective.beta * stats.dv_bound : stats.loss;
  return stats;
}

}  // namespace iblab
