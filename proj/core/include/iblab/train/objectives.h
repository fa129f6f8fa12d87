#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "iblab/autodiff.h"
#include "iblab/data/dataset.h"
#include "iblab/rng.h"
#include "iblab/train/model.h"

namespace iblab {

struct NormalObjective {};

struct DropoutObjective {
  double rate = 0.5;
};

struct VibObjective {
  double beta = 1e-3;
};

struct NibObjective {
  double beta = 1e-3;
  double noise_sigma = 0.5;
};

struct AibObjective {
  double beta = 1e-3;
  int inner_steps = 1;
  double pixel_fraction = 0.25;  // used when `pixels` is 0
  std::size_t pixels = 0;
  std::vector<std::size_t> critic_hidden = {128, 64};
  double critic_learning_rate = 0.0;  // 0: same as the model's learning rate

  std::size_t pixel_count(std::size_t input_dim) const;
};

using ObjectiveKind =
    std::variant<NormalObjective, DropoutObjective, VibObjective, NibObjective, AibObjective>;

std::string objective_name(const ObjectiveKind& objective);  // normal, dropout, vib, nib, aib
// The compression multiplier; 0 for Normal, the rate for Dropout.
double objective_beta(const ObjectiveKind& objective);
// Copy with the multiplier (or dropout rate) replaced.
ObjectiveKind with_beta(const ObjectiveKind& objective, double beta);
EncoderKind encoder_for(const ObjectiveKind& objective);
// Appends one message per violated constraint.
void collect_objective_errors(const ObjectiveKind& objective, std::size_t input_dim,
                              std::vector<std::string>& errors);
void validate_objective(const ObjectiveKind& objective, std::size_t input_dim);

nlohmann::json objective_to_json(const ObjectiveKind& objective);
// Unknown keys are reported in `errors`.
ObjectiveKind objective_from_json(const nlohmann::json& j, std::vector<std::string>& errors);

/// Per-batch training losses. Each returns the scalar to be minimized.
Var loss_normal(Model& model, Tape& tape, const Batch& batch);
Var loss_dropout(Model& model, Tape& tape, const Batch& batch, double rate, bool training, Rng* rng);
// Cross-entropy on a reparameterized sample plus beta * analytic KL to N(0, I).
Var loss_vib(Model& model, Tape& tape, const Batch& batch, double beta, Rng& rng);
// Cross-entropy on the noisy representation plus beta * the pairwise-kernel
// entropy of the clean representation with bandwidth noise_sigma.
Var loss_nib(Model& model, Tape& tape, const Batch& batch, double beta, double noise_sigma, Rng& rng);

/// Argmax accuracy over `indices` on the deterministic evaluation path.
double evaluate(const Model& model, const LabeledDataset& data, std::span<const std::size_t> indices,
                std::size_t batch_size = 1000);

}  // namespace iblab
