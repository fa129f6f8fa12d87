#include "iblab/attacks/attacks.h"

#include <algorithm>
#include <cmath>

#include "iblab/error.h"
#include "iblab/ops.h"

namespace iblab {

namespace {

constexpr std::size_t kDeepFoolChunk = 100;

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_labels(const Classifier& model, const Tensor& x, std::span<const int> labels) {
  if (x.cols() != model.input_dim()) fail(ErrorKind::kConfig, "attack input width does not match the model");
  if (labels.size() != x.rows()) fail(ErrorKind::kData, "one label per attacked row required");
}

// Runs DeepFool on a block of rows; writes into `out` at `offset`.
void deepfool_block(const Classifier& model, const Tensor& x, const DeepFoolConfig& config, DeepFoolResult& out,
                    std::size_t offset) {
  const std::size_t n = x.rows(), d = x.cols(), k_classes = model.num_classes();
  Tensor delta({n, d});
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  const auto clean = ops::argmax_rows(model.logits(x));
  std::vector<int> current(clean);
  for (int it = 0; !active.empty(); ++it) {
    // Current iterates, replicated once per class so one backward pass
    // yields the gradient of every class logit.
    Tensor rep({active.size() * k_classes, d});
    std::vector<int> pick_index(active.size() * k_classes);
    for (std::size_t a = 0; a < active.size(); ++a) {
      const std::size_t i = active[a];
      for (std::size_t c = 0; c < k_classes; ++c) {
        auto row = rep.row(a * k_classes + c);
        for (std::size_t j = 0; j < d; ++j) {
          const double v = x(i, j) + (1.0 + config.overshoot) * delta(i, j);
          row[j] = config.clip ? clip01(v) : v;
        }
        pick_index[a * k_classes + c] = static_cast<int>(c);
      }
    }
    Tape tape;
    Var input = tape.input(rep);
    Var logits = model.logits(tape, input);
    tape.backward(ops::sum(ops::pick(logits, pick_index)));
    const Tensor& g = logits.value();
    const Tensor& grad = input.grad();

    std::vector<std::size_t> still_active;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const std::size_t i = active[a];
      const auto f = g.row(a * k_classes);
      const int t = clean[i];
      const int now = static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin());
      current[i] = now;
      if (now != t) {
        out.iterations[offset + i] = it;
        continue;
      }
      if (it >= config.max_iter) {
        out.iterations[offset + i] = it;
        out.flagged[offset + i] = true;
        continue;
      }
      const auto grad_t = grad.row(a * k_classes + static_cast<std::size_t>(t));
      double best = INFINITY;
      std::size_t best_k = k_classes;
      double best_f = 0.0, best_norm2 = 0.0;
      for (std::size_t c = 0; c < k_classes; ++c) {
        if (static_cast<int>(c) == t) continue;
        const auto grad_c = grad.row(a * k_classes + c);
        double norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double w = grad_c[j] - grad_t[j];
          norm2 += w * w;
        }
        if (norm2 <= 0.0) continue;
        const double fk = f[c] - f[static_cast<std::size_t>(t)];
        const double ratio = std::abs(fk) / std::sqrt(norm2);
        if (ratio < best) {
          best = ratio;
          best_k = c;
          best_f = fk;
          best_norm2 = norm2;
        }
      }
      if (best_k == k_classes) {
        out.iterations[offset + i] = it;
        out.flagged[offset + i] = true;
        continue;
      }
      const auto grad_l = grad.row(a * k_classes + best_k);
      const double coeff = std::abs(best_f) / best_norm2;
      for (std::size_t j = 0; j < d; ++j) delta(i, j) += coeff * (grad_l[j] - grad_t[j]);
      still_active.push_back(i);
    }
    active = std::move(still_active);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = x(i, j) + (1.0 + config.overshoot) * delta(i, j);
      out.x_adv(offset + i, j) = config.clip ? clip01(v) : v;
      out.delta(offset + i, j) = delta(i, j);
      norm2 += delta(i, j) * delta(i, j);
    }
    out.l2[offset + i] = std::sqrt(norm2);
    out.original_class[offset + i] = clean[i];
    out.final_class[offset + i] = current[i];
  }
}

}  // namespace

Tensor Classifier::logits(const Tensor& x) const {
  Tape tape;
  return logits(tape, tape.constant(x)).value();
}

Var ModelClassifier::logits(Tape& tape, const Var& x) const {
  ForwardOptions options;
  options.trainable = false;
  // Non-trainable binding copies parameter values and never writes back.
  return const_cast<Model&>(model_).forward(tape, x, options).logits;
}

LinearClassifier::LinearClassifier(Tensor weights, Tensor bias) : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rank() != 2 || bias_.size() != weights_.cols()) {
    fail(ErrorKind::kConfig, "linear classifier needs weights [d x K] and bias [K]");
  }
}

Var LinearClassifier::logits(Tape& tape, const Var& x) const {
  return ops::linear(x, tape.constant(weights_), tape.constant(bias_));
}

Tensor loss_input_gradient(const Classifier& model, const Tensor& x, std::span<const int> labels) {
  check_labels(model, x, labels);
  Tape tape;
  Var input = tape.input(x);
  Var loss = ops::softmax_cross_entropy(model.logits(tape, input), labels);
  // The batch mean scales every row by 1/m; undo it so each row carries the
  // gradient of its own loss.
  tape.backward(ops::scale(loss, static_cast<double>(x.rows())));
  return input.has_grad() ? input.grad() : Tensor(x.shape());
}

Tensor sign_step(const Tensor& x, const Tensor& grad, double eps) {
  if (!std::isfinite(eps)) fail(ErrorKind::kConfig, "attack strength must be finite");
  if (!x.same_shape(grad)) fail(ErrorKind::kUsage, "gradient shape does not match the input");
  Tensor out = x;
  if (eps == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = clip01(x[i] + eps * sign(grad[i]));
  return out;
}

Tensor fgs(const Classifier& model, const Tensor& x, std::span<const int> labels, double eps) {
  if (!(eps >= 0.0)) fail(ErrorKind::kConfig, "attack strength must be >= 0");
  return sign_step(x, loss_input_gradient(model, x, labels), eps);
}

Tensor tgs(const Classifier& model, const Tensor& x, std::span<const int> targets, double eps) {
  if (!(eps >= 0.0)) fail(ErrorKind::kConfig, "attack strength must be >= 0");
  return sign_step(x, loss_input_gradient(model, x, targets), -eps);
}

std::vector<int> tgs_targets(std::span<const int> labels, int num_classes) {
  if (num_classes < 2) fail(ErrorKind::kConfig, "targeted attack needs at least two classes");
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = (labels[i] + 1) % num_classes;
  return out;
}

DeepFoolResult deepfool(const Classifier& model, const Tensor& x, const DeepFoolConfig& config) {
  if (config.max_iter < 1) fail(ErrorKind::kConfig, "DeepFool max_iter must be >= 1");
  if (!(config.overshoot >= 0.0)) fail(ErrorKind::kConfig, "DeepFool overshoot must be >= 0");
  if (x.cols() != model.input_dim()) fail(ErrorKind::kConfig, "attack input width does not match the model");
  const std::size_t n = x.rows();
  DeepFoolResult out{Tensor(x.shape()), Tensor(x.shape()), std::vector<double>(n), std::vector<int>(n),
                     std::vector<int>(n), std::vector<int>(n), std::vector<bool>(n, false)};
  for (std::size_t start = 0; start < n; start += kDeepFoolChunk) {
    const std::size_t count = std::min(kDeepFoolChunk, n - start);
    std::vector<std::size_t> rows(count);
    for (std::size_t i = 0; i < count; ++i) rows[i] = start + i;
    deepfool_block(model, x.gather_rows(rows), config, out, start);
  }
  return out;
}

}  // namespace iblab
