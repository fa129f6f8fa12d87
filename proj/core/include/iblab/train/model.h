#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "iblab/autodiff.h"
#include "iblab/mlp.h"
#include "iblab/params.h"
#include "iblab/rng.h"

namespace iblab {

/// Fully connected classifier layout. widths[bottleneck] is the width of the
/// representation Z; layers before it form the encoder and the rest the
/// decoder head, which ends in unnormalized logits.
struct ModelSpec {
  std::vector<std::size_t> widths;
  std::size_t bottleneck = 0;

  static ModelSpec synthetic();  // 12-10-10-2-10-2, Z has width 2
  static ModelSpec mnist();      // 784-128-128-10-128-10, Z has width 10

  std::size_t input_dim() const { return widths.front(); }
  std::size_t num_classes() const { return widths.back(); }
  std::size_t z_dim() const { return widths[bottleneck]; }
  std::string to_string() const;

  // Throws a config error when the layout is malformed or does not fit the
  // given data dimensions (pass 0 to skip a dimension check).
  void validate(std::size_t input_dim = 0, std::size_t num_classes = 0) const;
};

enum class EncoderKind {
  kDeterministic,  // Z = ReLU(...) of the last encoder layer
  kGaussian,       // last encoder layer emits (mu, log variance), linear
};

/// What happens inside a recorded forward pass.
struct ForwardOptions {
  double dropout_rate = 0.0;   // inverted dropout on hidden activations
  double noise_sigma = 0.0;    // additive Gaussian noise on Z
  bool sample_gaussian = false;  // Z = mu + sigma * eta for Gaussian encoders
  Rng* rng = nullptr;          // required when any of the above is active
  bool trainable = true;       // false binds parameters as constants
};

struct ForwardResult {
  Var z;        // the representation fed to the decoder (noisy/sampled if requested)
  Var z_clean;  // noise-free representation (mu for Gaussian encoders)
  Var logits;
  Var mu;       // Gaussian encoders only
  Var log_var;  // Gaussian encoders only
};

class Model {
 public:
  Model() = default;
  Model(ModelSpec spec, EncoderKind encoder, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  EncoderKind encoder_kind() const { return encoder_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  ForwardResult forward(Tape& tape, const Var& x, const ForwardOptions& options = {});

  // Deterministic evaluation path: (Z, logits) without recording gradients.
  std::pair<Tensor, Tensor> forward_bottleneck(const Tensor& x) const;
  Tensor logits(const Tensor& x) const;

 private:
  Var encode(Tape& tape, const Var& x, const ForwardOptions& options, ForwardResult& out);

  ModelSpec spec_;
  EncoderKind encoder_ = EncoderKind::kDeterministic;
  std::vector<Activation> encoder_acts_;
  std::vector<Activation> decoder_acts_;
  ParamStore params_;
};

// Inverted-dropout mask: entries are 0 with probability `rate`, otherwise
// 1 / (1 - rate).
Tensor dropout_mask(const Shape& shape, double rate, Rng& rng);

}  // namespace iblab
