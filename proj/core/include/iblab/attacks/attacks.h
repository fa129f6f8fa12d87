#pragma once

#include <span>
#include <vector>

#include "iblab/autodiff.h"
#include "iblab/tensor.h"
#include "iblab/train/model.h"

namespace iblab {

/// Differentiable classifier seen by the attacks. Parameters are read-only.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t num_classes() const = 0;
  // Logits recorded on `tape` so gradients reach `x`.
  virtual Var logits(Tape& tape, const Var& x) const = 0;
  Tensor logits(const Tensor& x) const;
};

// Deterministic evaluation path of a trained model.
class ModelClassifier : public Classifier {
 public:
  explicit ModelClassifier(const Model& model) : model_(model) {}
  std::size_t input_dim() const override { return model_.spec().input_dim(); }
  std::size_t num_classes() const override { return model_.spec().num_classes(); }
  Var logits(Tape& tape, const Var& x) const override;
  using Classifier::logits;

 private:
  const Model& model_;
};

// logits = x W + b.
class LinearClassifier : public Classifier {
 public:
  LinearClassifier(Tensor weights, Tensor bias);
  std::size_t input_dim() const override { return weights_.rows(); }
  std::size_t num_classes() const override { return weights_.cols(); }
  Var logits(Tape& tape, const Var& x) const override;
  using Classifier::logits;

 private:
  Tensor weights_;
  Tensor bias_;
};

/// Gradient of each row's own cross-entropy loss with respect to that row.
Tensor loss_input_gradient(const Classifier& model, const Tensor& x, std::span<const int> labels);

// clip(x + eps * sign(grad), 0, 1); eps may be negative.
Tensor sign_step(const Tensor& x, const Tensor& grad, double eps);

// clip(x + eps * sign(dL(x, y)/dx), 0, 1)
Tensor fgs(const Classifier& model, const Tensor& x, std::span<const int> labels, double eps);
// clip(x - eps * sign(dL(x, target)/dx), 0, 1)
Tensor tgs(const Classifier& model, const Tensor& x, std::span<const int> targets, double eps);
// (y + 1) mod K for every label.
std::vector<int> tgs_targets(std::span<const int> labels, int num_classes);

struct DeepFoolConfig {
  int max_iter = 50;
  double overshoot = 0.02;
  bool clip = true;  // keep iterates and the output inside [0, 1]
};

struct DeepFoolResult {
  Tensor x_adv;                       // clip(x + (1 + overshoot) * delta)
  Tensor delta;                       // accumulated perturbation, before overshoot
  std::vector<double> l2;             // |delta_i|_2
  std::vector<int> iterations;
  std::vector<int> original_class;
  std::vector<int> final_class;
  std::vector<bool> flagged;          // no label flip within max_iter
};

/// Minimal L2 perturbation by iterated linearization of the decision
/// boundaries around the current iterate x + (1 + overshoot) * delta.
DeepFoolResult deepfool(const Classifier& model, const Tensor& x, const DeepFoolConfig& config = {});

}  // namespace iblab
