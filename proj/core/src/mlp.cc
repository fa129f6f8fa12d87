#include "iblab/mlp.h"

#include <cmath>

#include "iblab/error.h"
#include "iblab/ops.h"

namespace iblab {

std::string weight_name(const std::string& prefix, std::size_t layer) {
  return prefix + "." + std::to_string(layer) + ".w";
}

std::string bias_name(const std::string& prefix, std::size_t layer) {
  return prefix + "." + std::to_string(layer) + ".b";
}

void append_dense_chain(ParamStore& store, const std::string& prefix,
                        std::span<const std::size_t> widths,
                        std::span<const Activation> activations, Rng& rng) {
  if (widths.size() < 2) fail(ErrorKind::kConfig, "a dense chain needs at least two widths");
  if (activations.size() != widths.size() - 1) {
    fail(ErrorKind::kConfig, "one activation per layer required");
  }
  for (std::size_t w : widths) {
    if (w == 0) fail(ErrorKind::kConfig, "layer widths must be positive");
  }
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double fan_in = static_cast<double>(widths[l]);
    const double fan_out = static_cast<double>(widths[l + 1]);
    const double limit = activations[l] == Activation::kRelu
                             ? std::sqrt(6.0 / fan_in)
                             : std::sqrt(6.0 / (fan_in + fan_out));
    Tensor w({widths[l], widths[l + 1]});
    for (double& v : w.data()) v = rng.uniform(-limit, limit);
    store.add(weight_name(prefix, l), std::move(w));
    store.add(bias_name(prefix, l), Tensor({widths[l + 1]}, 0.0));
  }
}

ParamStore init_params(std::span<const std::size_t> widths, std::uint64_t seed,
                       const std::string& prefix) {
  if (widths.size() < 2) fail(ErrorKind::kConfig, "a dense chain needs at least two widths");
  std::vector<Activation> acts(widths.size() - 1, Activation::kRelu);
  acts.back() = Activation::kIdentity;
  ParamStore store;
  Rng rng(seed);
  append_dense_chain(store, prefix, widths, acts, rng);
  return store;
}

Var dense_chain_forward(Tape& tape, ParamStore& store, const std::string& prefix,
                        std::span<const Activation> activations, Var x, bool trainable) {
  for (std::size_t l = 0; l < activations.size(); ++l) {
    Var w = tape.param(store, weight_name(prefix, l), trainable);
    Var b = tape.param(store, bias_name(prefix, l), trainable);
    x = ops::linear(x, w, b);
    if (activations[l] == Activation::kRelu) x = ops::relu(x);
  }
  return x;
}

}  // namespace iblab
