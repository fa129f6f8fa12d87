#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iblab/autodiff.h"
#include "iblab/params.h"
#include "iblab/rng.h"

namespace iblab {

enum class Activation { kRelu, kIdentity };

/// Appends the weights of a fully connected chain widths[0] -> ... ->
/// widths.back() to `store` as "<prefix>.<i>.w" / "<prefix>.<i>.b".
/// ReLU layers get He-uniform weights, identity layers Glorot-uniform; biases
/// start at zero. `activations` has one entry per layer.
void append_dense_chain(ParamStore& store, const std::string& prefix,
                        std::span<const std::size_t> widths,
                        std::span<const Activation> activations, Rng& rng);

/// Standalone chain with ReLU hidden layers and a linear final layer.
ParamStore init_params(std::span<const std::size_t> widths, std::uint64_t seed,
                       const std::string& prefix = "layer");

/// Runs a chain recorded on `tape`. With trainable=false the parameters are
/// bound as constants (no gradient reaches the store).
Var dense_chain_forward(Tape& tape, ParamStore& store, const std::string& prefix,
                        std::span<const Activation> activations, Var x,
                        bool trainable = true);

std::string weight_name(const std::string& prefix, std::size_t layer);
std::string bias_name(const std::string& prefix, std::size_t layer);

}  // namespace iblab
