#pragma once

#include <span>

#include "iblab/autodiff.h"

namespace iblab::ops {

// input[batch x d_in] * weights[d_in x d_out] + bias[d_out]
Var linear(const Var& input, const Var& weights, const Var& bias);
Var relu(const Var& x);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
// Elementwise product with a fixed tensor (dropout masks, pixel masks).
Var mul_const(const Var& x, const Tensor& mask);
Var exp(const Var& x);

Var sum(const Var& x);
Var mean(const Var& x);

Var concat_cols(const Var& a, const Var& b);
Var slice_cols(const Var& x, std::size_t begin, std::size_t end);
// out[i] = x[i, index[i]], shape [batch x 1].
Var pick(const Var& x, std::span<const int> index);

// Mean over the batch of -log softmax(logits)[label], max-shifted.
Var softmax_cross_entropy(const Var& logits, std::span<const int> labels);

// log((1/n) sum_i exp(x_i)) over every element, max-shifted. Scalar.
Var log_mean_exp(const Var& x);

// Mean over the batch of KL(N(mu, exp(log_var)) || N(0, I)), in nats.
Var gaussian_kl_to_standard(const Var& mu, const Var& log_var);

// -(1/m) sum_i log (1/m) sum_j exp(-|z_i - z_j|^2 / (2 sigma^2)), in nats:
// the pairwise-distance mixture entropy bound shared by NIB and the KDE
// estimator.
Var pairwise_kernel_entropy(const Var& z, double sigma);

// Forward-only helpers on plain tensors.
Tensor softmax_rows(const Tensor& logits);
std::vector<int> argmax_rows(const Tensor& x);

}  // namespace iblab::ops
