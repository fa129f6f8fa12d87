#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "iblab/attacks/robust_eval.h"
#include "iblab/mi/dv.h"
#include "iblab/mi/kde.h"
#include "iblab/sweep/sweep.h"
#include "iblab/train/model.h"
#include "iblab/train/objectives.h"
#include "iblab/train/trainer.h"

namespace iblab {

inline constexpr std::string_view kCodeVersion = "iblab-0.3.0";

enum class DatasetKind { kMnist, kFashionMnist, kSynthetic };

std::string to_string(DatasetKind kind);

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kMnist;
  std::filesystem::path dir;      // IDX directory; empty means default_data_dir()
  std::size_t train_limit = 0;    // keep only the first n training rows (0 = all)
  double target_mi_bits = 0.99;   // synthetic calibration targets
  double target_balance = 0.5;
  std::uint64_t label_seed = 0;   // seed for the sampled synthetic labels
};

struct BaCurveSettings {
  std::size_t cardinality = 10;
  double beta_lo = 0.5;
  double beta_hi = 500.0;
  std::size_t points = 40;
  double tol = 1e-9;
  int max_iter = 5000;
  bool cold_start = false;
};

struct MiEvalSettings {
  std::size_t samples = 2000;
  KdeConfig kde;
  std::size_t bins = 30;
  bool dv = false;
  DvTrainConfig dv_train;
};

/// Fully resolved experiment description. Every field has a value after
/// parsing, so serializing it records all defaults.
struct ExperimentConfig {
  DatasetConfig dataset;
  ModelSpec model = ModelSpec::mnist();
  ObjectiveKind objective = AibObjective{};
  TrainConfig train;
  SweepConfig sweep;  // spec, objective and train mirror the fields above
  AttackConfig attack;
  BaCurveSettings ba;
  MiEvalSettings mi;
  std::filesystem::path output_dir = "runs";
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> checkpoints;  // inputs of attack and mi-eval
  std::filesystem::path sweep_csv;                 // input of knee
};

/// Resolves defaults and validates. Unknown keys, wrong types and range
/// violations are all collected and reported in a single config error.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Reads a JSON file (empty path: an empty object), then applies `overrides`
/// as a recursive merge before parsing.
ExperimentConfig load_config(const std::filesystem::path& path, const nlohmann::json& overrides = {});

nlohmann::json config_to_json(const ExperimentConfig& config);

/// sha256 over the code version, the subcommand and the canonical form of
/// the config sections that subcommand reads. The output directory and the
/// sweep worker count never enter the digest.
std::string config_digest(const ExperimentConfig& config, std::string_view subcommand);

// Merges `patch` into `target`, recursing into objects.
void merge_json(nlohmann::json& target, const nlohmann::json& patch);

}  // namespace iblab
