#include "iblab/train/objectives.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "iblab/error.h"
#include "iblab/ops.h"

namespace iblab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where,
                std::vector<std::string>& errors) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) errors.push_back(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where,
          std::vector<std::string>& errors) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    errors.push_back(where + "." + key + ": wrong type");
  }
}

}  // namespace

std::size_t AibObjective::pixel_count(std::size_t input_dim) const {
  if (pixels > 0) return pixels;
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(pixel_fraction * input_dim)), 1, input_dim);
}

std::string objective_name(const ObjectiveKind& objective) {
  return std::visit(Overloaded{[](const NormalObjective&) { return "normal"; },
                               [](const DropoutObjective&) { return "dropout"; },
                               [](const VibObjective&) { return "vib"; },
                               [](const NibObjective&) { return "nib"; },
                               [](const AibObjective&) { return "aib"; }},
                    objective);
}

double objective_beta(const ObjectiveKind& objective) {
  return std::visit(Overloaded{[](const NormalObjective&) { return 0.0; },
                               [](const DropoutObjective& o) { return o.rate; },
                               [](const auto& o) { return o.beta; }},
                    objective);
}

ObjectiveKind with_beta(const ObjectiveKind& objective, double beta) {
  ObjectiveKind out = objective;
  std::visit(Overloaded{[](NormalObjective&) {}, [beta](DropoutObjective& o) { o.rate = beta; },
                        [beta](auto& o) { o.beta = beta; }},
             out);
  return out;
}

EncoderKind encoder_for(const ObjectiveKind& objective) {
  return std::holds_alternative<VibObjective>(objective) ? EncoderKind::kGaussian : EncoderKind::kDeterministic;
}

void collect_objective_errors(const ObjectiveKind& objective, std::size_t input_dim,
                              std::vector<std::string>& errors) {
  auto beta_ok = [&](double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) errors.push_back("objective.beta must be finite and >= 0");
  };
  std::visit(Overloaded{[](const NormalObjective&) {},
                        [&](const DropoutObjective& o) {
                          if (!(o.rate >= 0.0 && o.rate < 1.0)) errors.push_back("objective.rate must lie in [0, 1)");
                        },
                        [&](const VibObjective& o) { beta_ok(o.beta); },
                        [&](const NibObjective& o) {
                          beta_ok(o.beta);
                          if (!(o.noise_sigma > 0.0)) errors.push_back("objective.noise_sigma must be positive");
                        },
                        [&](const AibObjective& o) {
                          beta_ok(o.beta);
                          if (o.inner_steps < 1) errors.push_back("objective.inner_steps must be >= 1");
                          if (o.pixels == 0 && !(o.pixel_fraction > 0.0 && o.pixel_fraction <= 1.0)) {
                            errors.push_back("objective.pixel_fraction must lie in (0, 1]");
                          }
                          if (input_dim && o.pixels > input_dim) {
                            errors.push_back("objective.pixels exceeds the input width");
                          }
                          if (o.critic_learning_rate < 0.0) {
                            errors.push_back("objective.critic_learning_rate must be >= 0");
                          }
                          for (std::size_t w : o.critic_hidden) {
                            if (w == 0) errors.push_back("objective.critic_hidden widths must be positive");
                          }
                        }},
             objective);
}

void validate_objective(const ObjectiveKind& objective, std::size_t input_dim) {
  std::vector<std::string> errors;
  collect_objective_errors(objective, input_dim, errors);
  if (!errors.empty()) fail(ErrorKind::kConfig, errors.front());
}

nlohmann::json objective_to_json(const ObjectiveKind& objective) {
  nlohmann::json j = std::visit(
      Overloaded{[](const NormalObjective&) { return nlohmann::json::object(); },
                 [](const DropoutObjective& o) { return nlohmann::json{{"rate", o.rate}}; },
                 [](const VibObjective& o) { return nlohmann::json{{"beta", o.beta}}; },
                 [](const NibObjective& o) { return nlohmann::json{{"beta", o.beta}, {"noise_sigma", o.noise_sigma}}; },
                 [](const AibObjective& o) {
                   return nlohmann::json{{"beta", o.beta},
                                         {"inner_steps", o.inner_steps},
                                         {"pixel_fraction", o.pixel_fraction},
                                         {"pixels", o.pixels},
                                         {"critic_hidden", o.critic_hidden},
                                         {"critic_learning_rate", o.critic_learning_rate}};
                 }},
      objective);
  j["kind"] = objective_name(objective);
  return j;
}

ObjectiveKind objective_from_json(const nlohmann::json& j, std::vector<std::string>& errors) {
  const std::string where = "objective";
  if (!j.is_object()) {
    errors.push_back(where + ": expected an object");
    return NormalObjective{};
  }
  std::string kind = "normal";
  read(j, "kind", kind, where, errors);
  if (kind == "normal") {
    check_keys(j, {"kind"}, where, errors);
    return NormalObjective{};
  }
  if (kind == "dropout") {
    DropoutObjective o;
    check_keys(j, {"kind", "rate"}, where, errors);
    read(j, "rate", o.rate, where, errors);
    return o;
  }
  if (kind == "vib") {
    VibObjective o;
    check_keys(j, {"kind", "beta"}, where, errors);
    read(j, "beta", o.beta, where, errors);
    return o;
  }
  if (kind == "nib") {
    NibObjective o;
    check_keys(j, {"kind", "beta", "noise_sigma"}, where, errors);
    read(j, "beta", o.beta, where, errors);
    read(j, "noise_sigma", o.noise_sigma, where, errors);
    return o;
  }
  if (kind == "aib") {
    AibObjective o;
    check_keys(j, {"kind", "beta", "inner_steps", "pixel_fraction", "pixels", "critic_hidden", "critic_learning_rate"},
               where, errors);
    read(j, "beta", o.beta, where, errors);
    read(j, "inner_steps", o.inner_steps, where, errors);
    read(j, "pixel_fraction", o.pixel_fraction, where, errors);
    read(j, "pixels", o.pixels, where, errors);
    read(j, "critic_hidden", o.critic_hidden, where, errors);
    read(j, "critic_learning_rate", o.critic_learning_rate, where, errors);
    return o;
  }
  errors.push_back(where + ".kind: unknown objective '" + kind + "' (normal, dropout, vib, nib, aib)");
  return NormalObjective{};
}

Var loss_normal(Model& model, Tape& tape, const Batch& batch) {
  auto r = model.forward(tape, tape.constant(batch.features));
  return ops::softmax_cross_entropy(r.logits, batch.labels);
}

Var loss_dropout(Model& model, Tape& tape, const Batch& batch, double rate, bool training, Rng* rng) {
  if (!(rate >= 0.0 && rate < 1.0)) fail(ErrorKind::kConfig, "dropout rate must lie in [0, 1)");
  ForwardOptions options;
  if (training) {
    options.dropout_rate = rate;
    options.rng = rng;
  }
  auto r = model.forward(tape, tape.constant(batch.features), options);
  return ops::softmax_cross_entropy(r.logits, batch.labels);
}

Var loss_vib(Model& model, Tape& tape, const Batch& batch, double beta, Rng& rng) {
  if (model.encoder_kind() != EncoderKind::kGaussian) fail(ErrorKind::kUsage, "VIB needs a Gaussian encoder");
  ForwardOptions options;
  options.sample_gaussian = true;
  options.rng = &rng;
  auto r = model.forward(tape, tape.constant(batch.features), options);
  Var ce = ops::softmax_cross_entropy(r.logits, batch.labels);
  if (beta == 0.0) return ce;
  return ops::add(ce, ops::scale(ops::gaussian_kl_to_standard(r.mu, r.log_var), beta));
}

Var loss_nib(Model& model, Tape& tape, const Batch& batch, double beta, double noise_sigma, Rng& rng) {
  if (!(noise_sigma > 0.0)) fail(ErrorKind::kConfig, "NIB noise sigma must be positive");
  ForwardOptions options;
  options.noise_sigma = noise_sigma;
  options.rng = &rng;
  auto r = model.forward(tape, tape.constant(batch.features), options);
  Var ce = ops::softmax_cross_entropy(r.logits, batch.labels);
  if (beta == 0.0) return ce;
  return ops::add(ce, ops::scale(ops::pairwise_kernel_entropy(r.z_clean, noise_sigma), beta));
}

double evaluate(const Model& model, const LabeledDataset& data, std::span<const std::size_t> indices,
                std::size_t batch_size) {
  if (indices.empty()) fail(ErrorKind::kData, "evaluation on an empty index set");
  if (batch_size == 0) fail(ErrorKind::kConfig, "evaluation batch size must be positive");
  std::size_t correct = 0;
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const auto chunk = indices.subspan(start, std::min(batch_size, indices.size() - start));
    const auto predicted = ops::argmax_rows(model.logits(data.features.gather_rows(chunk)));
    for (std::size_t i = 0; i < chunk.size(); ++i) correct += predicted[i] == data.labels[chunk[i]];
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

}  // namespace iblab
