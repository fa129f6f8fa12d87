#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "iblab/checkpoint.h"
#include "iblab/csv.h"
#include "iblab/data/dataset.h"
#include "iblab/mi/dv.h"
#include "iblab/train/model.h"
#include "iblab/train/objectives.h"

namespace iblab {

struct TrainConfig {
  double learning_rate = 2e-4;
  std::size_t batch = 256;
  int patience = 20;     // epochs without a validation improvement
  int max_epochs = 200;
  std::uint64_t seed = 0;

  void collect_errors(std::vector<std::string>& errors) const;
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_acc = 0.0;
  double dv_bound = 0.0;  // mean over the epoch's AIB steps, NaN otherwise
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val_acc = 0.0;
  bool stopped_early = false;
  int clipped_steps = 0;  // AIB steps whose DV term saturated

  // Columns: epoch, train_loss, val_acc, dv_bound.
  CsvTable table() const;
};

struct TrainedModel {
  Model model;
  std::optional<StatisticNet> critic;
  ObjectiveKind objective;
  TrainConfig config;
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains on split.train(), scores split.validation() after every epoch and
/// returns the parameters of the best validation epoch (the earliest one on
/// ties). Stops after `patience` epochs without improvement. A non-finite
/// loss aborts with a numerical error carrying the epoch log so far.
TrainedModel train(const LabeledDataset& data, const SplitIndices& split, const ModelSpec& spec,
                   const ObjectiveKind& objective, const TrainConfig& config,
                   const EpochCallback& on_epoch = {});

Checkpoint to_checkpoint(const TrainedModel& trained);
TrainedModel from_checkpoint(const Checkpoint& checkpoint);

nlohmann::json train_config_to_json(const TrainConfig& config);
nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

}  // namespace iblab
