#include "iblab/train/model.h"

#include <sstream>

#include "iblab/error.h"
#include "iblab/ops.h"

namespace iblab {

namespace {

constexpr char kEncoder[] = "enc";
constexpr char kDecoder[] = "dec";

Var apply_dropout(const Var& h, const ForwardOptions& options) {
  if (options.dropout_rate <= 0.0) return h;
  return ops::mul_const(h, dropout_mask(h.value().shape(), options.dropout_rate, *options.rng));
}

}  // namespace

ModelSpec ModelSpec::synthetic() { return {{12, 10, 10, 2, 10, 2}, 3}; }

ModelSpec ModelSpec::mnist() { return {{784, 128, 128, 10, 128, 10}, 3}; }

std::string ModelSpec::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < widths.size(); ++i) out << (i ? "-" : "") << widths[i];
  out << " (bottleneck " << bottleneck << ")";
  return out.str();
}

void ModelSpec::validate(std::size_t input_dim_check, std::size_t classes_check) const {
  if (widths.size() < 3) fail(ErrorKind::kConfig, "model needs at least input, bottleneck and output widths");
  for (std::size_t w : widths) {
    if (w == 0) fail(ErrorKind::kConfig, "model widths must be positive");
  }
  if (bottleneck == 0 || bottleneck + 1 >= widths.size()) {
    fail(ErrorKind::kConfig, "bottleneck index must name a hidden layer");
  }
  if (input_dim_check && input_dim() != input_dim_check) {
    fail(ErrorKind::kConfig, "model input width " + std::to_string(input_dim()) + " does not match data width " +
                                 std::to_string(input_dim_check));
  }
  if (classes_check && num_classes() != classes_check) {
    fail(ErrorKind::kConfig, "model output width " + std::to_string(num_classes()) +
                                 " does not match class count " + std::to_string(classes_check));
  }
}

Model::Model(ModelSpec spec, EncoderKind encoder, std::uint64_t seed)
    : spec_(std::move(spec)), encoder_(encoder) {
  spec_.validate();
  const std::size_t b = spec_.bottleneck;
  std::vector<std::size_t> enc_widths(spec_.widths.begin(), spec_.widths.begin() + b + 1);
  std::vector<std::size_t> dec_widths(spec_.widths.begin() + b, spec_.widths.end());
  encoder_acts_.assign(b, Activation::kRelu);
  if (encoder_ == EncoderKind::kGaussian) {
    enc_widths.back() *= 2;
    encoder_acts_.back() = Activation::kIdentity;
  }
  decoder_acts_.assign(dec_widths.size() - 1, Activation::kRelu);
  decoder_acts_.back() = Activation::kIdentity;
  Rng rng(Rng::derive(seed, 0x1417));
  append_dense_chain(params_, kEncoder, enc_widths, encoder_acts_, rng);
  append_dense_chain(params_, kDecoder, dec_widths, decoder_acts_, rng);
}

Var Model::encode(Tape& tape, const Var& x, const ForwardOptions& options, ForwardResult& out) {
  if (x.value().cols() != spec_.input_dim()) {
    fail(ErrorKind::kConfig, "input width " + std::to_string(x.value().cols()) + " does not match model width " +
                                 std::to_string(spec_.input_dim()));
  }
  Var h = x;
  for (std::size_t l = 0; l < encoder_acts_.size(); ++l) {
    Var w = tape.param(params_, weight_name(kEncoder, l), options.trainable);
    Var b = tape.param(params_, bias_name(kEncoder, l), options.trainable);
    h = ops::linear(h, w, b);
    if (encoder_acts_[l] == Activation::kRelu) h = ops::relu(h);
    if (l + 1 < encoder_acts_.size()) h = apply_dropout(h, options);
  }
  if (encoder_ == EncoderKind::kGaussian) {
    const std::size_t dz = spec_.z_dim();
    out.mu = ops::slice_cols(h, 0, dz);
    out.log_var = ops::slice_cols(h, dz, 2 * dz);
    out.z_clean = out.mu;
    if (!options.sample_gaussian) return out.mu;
    Tensor eta(out.mu.value().shape());
    for (double& v : eta.data()) v = options.rng->normal();
    // sigma * eta = exp(log_var / 2) * eta
    Var sigma = ops::exp(ops::scale(out.log_var, 0.5));
    return ops::add(out.mu, ops::mul_const(sigma, eta));
  }
  out.z_clean = h;
  if (options.noise_sigma > 0.0) {
    Tensor noise(h.value().shape());
    for (double& v : noise.data()) v = options.noise_sigma * options.rng->normal();
    h = ops::add(h, tape.constant(std::move(noise)));
  }
  return h;
}

ForwardResult Model::forward(Tape& tape, const Var& x, const ForwardOptions& options) {
  const bool random = options.dropout_rate > 0.0 || options.noise_sigma > 0.0 || options.sample_gaussian;
  if (random && !options.rng) fail(ErrorKind::kUsage, "stochastic forward pass needs an Rng");
  ForwardResult out;
  Var h = encode(tape, x, options, out);
  out.z = h;
  h = apply_dropout(h, options);
  for (std::size_t l = 0; l < decoder_acts_.size(); ++l) {
    Var w = tape.param(params_, weight_name(kDecoder, l), options.trainable);
    Var b = tape.param(params_, bias_name(kDecoder, l), options.trainable);
    h = ops::linear(h, w, b);
    if (decoder_acts_[l] == Activation::kRelu) {
      h = apply_dropout(ops::relu(h), options);
    }
  }
  out.logits = h;
  return out;
}

std::pair<Tensor, Tensor> Model::forward_bottleneck(const Tensor& x) const {
  Tape tape;
  ForwardOptions options;
  options.trainable = false;
  // Non-trainable binding copies parameter values and never writes back.
  auto r = const_cast<Model*>(this)->forward(tape, tape.constant(x), options);
  return {r.z_clean.value(), r.logits.value()};
}

Tensor Model::logits(const Tensor& x) const { return forward_bottleneck(x).second; }

Tensor dropout_mask(const Shape& shape, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) fail(ErrorKind::kConfig, "dropout rate must lie in [0, 1)");
  Tensor mask(shape);
  const double keep = 1.0 - rate;
  for (double& v : mask.data()) v = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  return mask;
}

}  // namespace iblab
