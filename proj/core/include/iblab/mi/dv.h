#pragma once

#include <cstdint>
#include <vector>

#include "iblab/autodiff.h"
#include "iblab/mi/estimate.h"
#include "iblab/mlp.h"
#include "iblab/params.h"

namespace iblab {

/// Scalar critic T(x, z): an MLP over the concatenated pair with ReLU hidden
/// layers and a linear output.
class StatisticNet {
 public:
  StatisticNet(std::size_t x_dim, std::size_t z_dim, std::vector<std::size_t> hidden,
               std::uint64_t seed);

  // [batch x 1] scores. trainable=false binds the weights as constants.
  Var forward(Tape& tape, const Var& x, const Var& z, bool trainable = true);
  Tensor evaluate(const Tensor& x, const Tensor& z);

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::size_t x_dim() const { return x_dim_; }
  std::size_t z_dim() const { return z_dim_; }

 private:
  std::size_t x_dim_;
  std::size_t z_dim_;
  std::vector<Activation> activations_;
  ParamStore params_;
};

// mean(t_joint) - log mean exp(t_marginal), in nats.
Var dv_bound(const Var& t_joint, const Var& t_marginal);
double dv_bound_value(const Tensor& t_joint, const Tensor& t_marginal);

struct DvTrainConfig {
  int steps = 2000;
  std::size_t batch = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double tail_fraction = 0.1;
};

/// Trains `net` by gradient ascent on the DV bound, pairing each minibatch of
/// z with its own x (joint) and with x from an independent minibatch
/// (product of marginals). Returns the bound averaged over the final
/// tail_fraction of steps, in bits. A bound above ln(N) + 1 nats is reported
/// as a numerical instability.
MIEstimate dv_train_estimate(const Tensor& x, const Tensor& z, StatisticNet& net,
                             const DvTrainConfig& config = {});

}  // namespace iblab
