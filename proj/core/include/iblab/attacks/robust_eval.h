#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "iblab/attacks/attacks.h"
#include "iblab/csv.h"
#include "iblab/data/dataset.h"
#include "iblab/train/model.h"

namespace iblab {

struct AttackConfig {
  std::vector<double> fgs_eps = {0.05, 0.10, 0.15};
  std::vector<double> tgs_eps = {0.1, 0.2, 0.3};
  DeepFoolConfig deepfool;
  bool run_deepfool = true;
  std::size_t deepfool_samples = 0;  // leading test rows attacked by DeepFool; 0 = all
  std::size_t batch = 500;

  void collect_errors(std::vector<std::string>& errors) const;
};

nlohmann::json attack_config_to_json(const AttackConfig& config);

struct AttackedModel {
  std::string model_id;
  std::string objective;
  double beta = 0.0;
  std::uint64_t seed = 0;
  const Model* model = nullptr;
};

/// One CSV row: an accuracy for clean/fgs/tgs rows, a perturbation norm for
/// deepfool rows. Unused fields are NaN (written empty).
struct AttackRow {
  std::string model_id;
  std::string objective;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::string attack;  // clean, fgs, tgs, deepfool
  double eps = 0.0;
  double accuracy = 0.0;
  double mean_l2 = 0.0;
  double sum_l2 = 0.0;
  std::size_t flagged = 0;
  std::size_t samples = 0;
};

struct AttackSummary {
  std::string objective;
  std::string attack;
  double eps = 0.0;
  double mean = 0.0;  // accuracy, or mean |delta|_2 for deepfool
  double std = 0.0;   // sample standard deviation over seeds (0 for one seed)
  std::size_t seeds = 0;
};

struct AttackReport {
  std::vector<AttackRow> rows;

  // Aggregated over seeds per (objective, attack, eps), in first-seen order.
  std::vector<AttackSummary> summary() const;
  CsvTable table() const;
  static AttackReport from_table(const CsvTable& table);
  // Plain-text tables: accuracy under FGS/TGS, and mean DeepFool norms.
  std::string accuracy_text() const;
  std::string deepfool_text() const;
};

/// Clean, FGS and TGS accuracy over every test row, and DeepFool norms over
/// the leading `deepfool_samples` rows, for each model.
AttackReport robust_eval(std::span<const AttackedModel> models, const LabeledDataset& data,
                         std::span<const std::size_t> test_indices, const AttackConfig& config);

}  // namespace iblab
