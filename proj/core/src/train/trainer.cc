#include "iblab/train/trainer.h"

#include <cmath>
#include <sstream>

#include "iblab/error.h"
#include "iblab/train/aib.h"

namespace iblab {

namespace {

constexpr std::uint64_t kInitStream = 0x1;
constexpr std::uint64_t kNoiseStream = 0x2;
constexpr std::uint64_t kCriticStream = 0x3;
constexpr std::uint64_t kMarginalStream = 0x4;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string log_tail(const TrainLog& log) {
  std::ostringstream out;
  for (const auto& e : log.epochs) {
    out << "\n  epoch " << e.epoch << " loss " << e.train_loss << " val_acc " << e.val_acc;
  }
  return out.str();
}

}  // namespace

void TrainConfig::collect_errors(std::vector<std::string>& errors) const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) errors.push_back("train.learning_rate must be positive");
  if (batch == 0) errors.push_back("train.batch must be positive");
  if (patience < 1) errors.push_back("train.patience must be >= 1");
  if (max_epochs < 1) errors.push_back("train.max_epochs must be >= 1");
}

void TrainConfig::validate() const {
  std::vector<std::string> errors;
  collect_errors(errors);
  if (!errors.empty()) fail(ErrorKind::kConfig, errors.front());
}

CsvTable TrainLog::table() const {
  CsvTable t;
  t.schema = "iblab.train_log";
  t.columns = {"epoch", "train_loss", "val_acc", "dv_bound"};
  for (const auto& e : epochs) {
    t.rows.push_back({std::to_string(e.epoch), format_double(e.train_loss), format_double(e.val_acc),
                      std::isnan(e.dv_bound) ? "" : format_double(e.dv_bound)});
  }
  return t;
}

TrainedModel train(const LabeledDataset& data, const SplitIndices& split, const ModelSpec& spec,
                   const ObjectiveKind& objective, const TrainConfig& config, const EpochCallback& on_epoch) {
  data.validate();
  spec.validate(data.dim(), static_cast<std::size_t>(data.num_classes));
  validate_objective(objective, data.dim());
  config.validate();
  const auto train_idx = split.train();
  const auto val_idx = split.validation();
  if (train_idx.empty() || val_idx.empty()) fail(ErrorKind::kData, "training needs nonempty train and validation splits");

  TrainedModel out{Model(spec, encoder_for(objective), Rng::derive(config.seed, kInitStream)), std::nullopt,
                   objective, config, {}};
  Model& model = out.model;
  const auto* aib = std::get_if<AibObjective>(&objective);
  if (aib) {
    out.critic.emplace(spec.input_dim(), spec.z_dim(), aib->critic_hidden, Rng::derive(config.seed, kCriticStream));
  }
  Rng noise(Rng::derive(config.seed, kNoiseStream));
  Rng marginal(Rng::derive(config.seed, kMarginalStream));
  ParamStore best = model.params();
  int since_best = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    MinibatchIterator batches(data, train_idx, config.batch, config.seed, static_cast<std::uint64_t>(epoch));
    Batch batch;
    double loss_sum = 0.0, dv_sum = 0.0;
    std::size_t steps = 0;
    while (batches.next(batch)) {
      double loss = 0.0;
      if (aib) {
        const Batch second = sample_batch(data, train_idx, batch.labels.size(), marginal);
        const AibStepStats s = aib_update(model, *out.critic, batch, second, *aib, config.learning_rate);
        loss = s.loss;
        dv_sum += s.dv_bound;
        out.log.clipped_steps += s.clipped;
      } else {
        Tape tape;
        Var l = std::visit(
            Overloaded{[&](const NormalObjective&) { return loss_normal(model, tape, batch); },
                       [&](const DropoutObjective& o) { return loss_dropout(model, tape, batch, o.rate, true, &noise); },
                       [&](const VibObjective& o) { return loss_vib(model, tape, batch, o.beta, noise); },
                       [&](const NibObjective& o) { return loss_nib(model, tape, batch, o.beta, o.noise_sigma, noise); },
                       [&](const AibObjective&) -> Var { fail(ErrorKind::kUsage, "unreachable"); }},
            objective);
        loss = l.value()[0];
        if (std::isfinite(loss)) {
          tape.backward(l);
          adam_step(model.params(), config.learning_rate);
        }
      }
      if (!std::isfinite(loss)) {
        fail(ErrorKind::kNumerical, "training diverged (non-finite loss) in epoch " + std::to_string(epoch) +
                                        " step " + std::to_string(steps) + log_tail(out.log));
      }
      loss_sum += loss;
      ++steps;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(steps);
    rec.val_acc = evaluate(model, data, val_idx);
    rec.dv_bound = aib ? dv_sum / static_cast<double>(steps) : NAN;
    out.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (out.log.best_epoch < 0 || rec.val_acc > out.log.best_val_acc) {
      out.log.best_epoch = epoch;
      out.log.best_val_acc = rec.val_acc;
      best.copy_values_from(model.params());
      since_best = 0;
    } else if (++since_best >= config.patience) {
      out.log.stopped_early = true;
      break;
    }
  }
  model.params().copy_values_from(best);
  return out;
}

nlohmann::json train_config_to_json(const TrainConfig& config) {
  return {{"learning_rate", config.learning_rate},
          {"batch", config.batch},
          {"patience", config.patience},
          {"max_epochs", config.max_epochs},
          {"seed", config.seed}};
}

nlohmann::json model_spec_to_json(const ModelSpec& spec) {
  return {{"widths", spec.widths}, {"bottleneck", spec.bottleneck}};
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  try {
    return {j.at("widths").get<std::vector<std::size_t>>(), j.at("bottleneck").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kIo, std::string("malformed model spec: ") + e.what());
  }
}

Checkpoint to_checkpoint(const TrainedModel& trained) {
  Checkpoint c;
  c.seed = trained.config.seed;
  c.metadata["model"] = model_spec_to_json(trained.model.spec());
  c.metadata["objective"] = objective_to_json(trained.objective);
  c.metadata["train"] = train_config_to_json(trained.config);
  c.metadata["best_epoch"] = trained.log.best_epoch;
  c.metadata["best_val_acc"] = trained.log.best_val_acc;
  c.metadata["has_critic"] = trained.critic.has_value();
  c.add_store(trained.model.params());
  if (trained.critic) c.add_store(trained.critic->params());
  return c;
}

TrainedModel from_checkpoint(const Checkpoint& checkpoint) {
  const auto& meta = checkpoint.metadata;
  if (!meta.contains("model") || !meta.contains("objective")) {
    fail(ErrorKind::kIo, "checkpoint metadata lacks a model or objective description");
  }
  std::vector<std::string> errors;
  ObjectiveKind objective = objective_from_json(meta["objective"], errors);
  if (!errors.empty()) fail(ErrorKind::kIo, "checkpoint objective: " + errors.front());
  const ModelSpec spec = model_spec_from_json(meta["model"]);
  TrainedModel out{Model(spec, encoder_for(objective), 0), std::nullopt, objective, {}, {}};
  out.config.seed = checkpoint.seed;
  if (meta.contains("train")) {
    const auto& t = meta["train"];
    out.config.learning_rate = t.value("learning_rate", out.config.learning_rate);
    out.config.batch = t.value("batch", out.config.batch);
    out.config.patience = t.value("patience", out.config.patience);
    out.config.max_epochs = t.value("max_epochs", out.config.max_epochs);
  }
  out.log.best_epoch = meta.value("best_epoch", -1);
  out.log.best_val_acc = meta.value("best_val_acc", 0.0);
  checkpoint.restore_store(out.model.params());
  if (meta.value("has_critic", false)) {
    const auto* aib = std::get_if<AibObjective>(&objective);
    if (!aib) fail(ErrorKind::kIo, "checkpoint carries a critic for a non-AIB objective");
    out.critic.emplace(spec.input_dim(), spec.z_dim(), aib->critic_hidden, 0);
    checkpoint.restore_store(out.critic->params());
  }
  return out;
}

}  // namespace iblab
