#include "iblab/mi/dv.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iblab/error.h"
#include "iblab/info.h"
#include "iblab/ops.h"
#include "iblab/rng.h"

namespace iblab {

namespace {

constexpr char kPrefix[] = "critic";

std::vector<std::size_t> draw(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<std::size_t> idx(m);
  for (auto& i : idx) i = rng.below(n);
  return idx;
}

}  // namespace

StatisticNet::StatisticNet(std::size_t x_dim, std::size_t z_dim, std::vector<std::size_t> hidden,
                           std::uint64_t seed)
    : x_dim_(x_dim), z_dim_(z_dim) {
  if (x_dim == 0 || z_dim == 0) fail(ErrorKind::kConfig, "critic input widths must be positive");
  std::vector<std::size_t> widths{x_dim + z_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  activations_.assign(widths.size() - 1, Activation::kRelu);
  activations_.back() = Activation::kIdentity;
  Rng rng(seed);
  append_dense_chain(params_, kPrefix, widths, activations_, rng);
}

Var StatisticNet::forward(Tape& tape, const Var& x, const Var& z, bool trainable) {
  if (x.value().cols() != x_dim_ || z.value().cols() != z_dim_) {
    fail(ErrorKind::kUsage, "critic input widths do not match");
  }
  return dense_chain_forward(tape, params_, kPrefix, activations_, ops::concat_cols(x, z), trainable);
}

Tensor StatisticNet::evaluate(const Tensor& x, const Tensor& z) {
  Tape tape;
  return forward(tape, tape.constant(x), tape.constant(z), false).value();
}

Var dv_bound(const Var& t_joint, const Var& t_marginal) {
  return ops::sub(ops::mean(t_joint), ops::log_mean_exp(t_marginal));
}

double dv_bound_value(const Tensor& t_joint, const Tensor& t_marginal) {
  double mean = 0.0;
  for (double v : t_joint.data()) mean += v;
  mean /= static_cast<double>(t_joint.size());
  double peak = -INFINITY;
  for (double v : t_marginal.data()) peak = std::max(peak, v);
  double acc = 0.0;
  for (double v : t_marginal.data()) acc += std::exp(v - peak);
  return mean - (peak + std::log(acc / static_cast<double>(t_marginal.size())));
}

MIEstimate dv_train_estimate(const Tensor& x, const Tensor& z, StatisticNet& net,
                             const DvTrainConfig& config) {
  if (x.rows() != z.rows()) fail(ErrorKind::kData, "DV estimate needs row-aligned X and Z");
  if (config.steps < 1 || config.batch < 2 || !(config.learning_rate > 0.0) ||
      !(config.tail_fraction > 0.0 && config.tail_fraction <= 1.0)) {
    fail(ErrorKind::kConfig, "invalid DV training settings");
  }
  const std::size_t n = x.rows();
  const std::size_t m = std::min(config.batch, n);
  const double ceiling = std::log(static_cast<double>(n)) + 1.0;
  const int tail = std::max(1, static_cast<int>(std::ceil(config.steps * config.tail_fraction)));
  Rng rng(Rng::derive(config.seed, 0xd5));
  double tail_sum = 0.0;
  for (int step = 0; step < config.steps; ++step) {
    const auto joint_idx = draw(n, m, rng);
    const auto other_idx = draw(n, m, rng);
    Tape tape;
    Var xz = tape.constant(x.gather_rows(joint_idx));
    Var zz = tape.constant(z.gather_rows(joint_idx));
    Var xm = tape.constant(x.gather_rows(other_idx));
    Var bound = dv_bound(net.forward(tape, xz, zz), net.forward(tape, xm, zz));
    const double value = bound.value()[0];
    if (!std::isfinite(value) || value > ceiling) {
      std::ostringstream msg;
      msg << "DV bound diverged at step " << step << " (" << value << " nats > ln N + 1 = " << ceiling
          << "); try a smaller learning rate";
      fail(ErrorKind::kNumerical, msg.str());
    }
    if (step >= config.steps - tail) tail_sum += value;
    tape.backward(ops::scale(bound, -1.0));
    adam_step(net.params(), config.learning_rate);
  }
  const double nats = tail_sum / tail;
  return make_estimate(MiMethod::kDv, info::nats_to_bits(nats),
                       {{"steps", config.steps},
                        {"batch", m},
                        {"learning_rate", config.learning_rate},
                        {"seed", config.seed},
                        {"tail_fraction", config.tail_fraction}});
}

}  // namespace iblab
