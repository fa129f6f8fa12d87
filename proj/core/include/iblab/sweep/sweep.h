#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "iblab/csv.h"
#include "iblab/data/dataset.h"
#include "iblab/mi/kde.h"
#include "iblab/sweep/knee.h"
#include "iblab/train/objectives.h"
#include "iblab/train/trainer.h"

namespace iblab {

// n points from lo to hi, evenly spaced in log scale (both ends included).
std::vector<double> geometric_grid(double lo, double hi, std::size_t n);

struct SweepConfig {
  std::vector<double> betas = geometric_grid(2e-4, 2.0, 16);
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  ObjectiveKind objective = AibObjective{};
  ModelSpec spec = ModelSpec::mnist();
  TrainConfig train;
  std::size_t eval_samples = 2000;
  std::uint64_t eval_seed = 0;
  KdeConfig kde;
  std::size_t workers = 1;

  void collect_errors(std::vector<std::string>& errors) const;
};

struct IBCurvePoint {
  double beta = 0.0;
  std::uint64_t seed = 0;
  double mi_xz_bits = 0.0;
  double mi_zy_bits = 0.0;
  double clean_accuracy = 0.0;
  std::string model_id;
  std::string status = "ok";  // "ok" or "failed: <cause>"

  bool ok() const { return status == "ok"; }
};

struct SweepCell {
  double beta = 0.0;
  std::uint64_t seed = 0;
};

/// Runs every cell through `run` on `workers` threads. Results pass through
/// a single collector, which invokes `on_result` (if set) one at a time and
/// in completion order. A cell that throws becomes a failed point. The
/// returned points are sorted by (beta, seed).
std::vector<IBCurvePoint> run_cells(std::span<const SweepCell> cells,
                                    const std::function<IBCurvePoint(const SweepCell&)>& run,
                                    std::size_t workers,
                                    const std::function<void(const IBCurvePoint&)>& on_result = {});

/// Fixed MI evaluation subset: the first `count` entries of a seeded
/// permutation of `held_out`.
std::vector<std::size_t> eval_subset(std::span<const std::size_t> held_out, std::size_t count, std::uint64_t seed);

/// KDE estimates of I(X;Z) and I(Z;Y) plus clean accuracy over `accuracy_indices`.
IBCurvePoint measure_point(const Model& model, const LabeledDataset& data, std::span<const std::size_t> mi_indices,
                           std::span<const std::size_t> accuracy_indices, const KdeConfig& kde);

// "<objective>-b<beta>-s<seed>"
std::string sweep_model_id(const ObjectiveKind& objective, double beta, std::uint64_t seed);

using CellTrainer = std::function<TrainedModel(const SweepCell&, const ObjectiveKind&, const TrainConfig&)>;

/// Trains seeds x betas models (via `trainer`, default: train() on `split`),
/// measuring each on the held-out rows.
std::vector<IBCurvePoint> sweep(const LabeledDataset& train_data, const SplitIndices& split,
                                const LabeledDataset& eval_data, std::span<const std::size_t> held_out,
                                const SweepConfig& config, const CellTrainer& trainer = {},
                                const std::function<void(const IBCurvePoint&)>& on_result = {});

struct BetaMean {
  double beta = 0.0;
  double mi_xz_bits = 0.0;
  double mi_zy_bits = 0.0;
  double clean_accuracy = 0.0;
  std::size_t seeds = 0;
};

struct AggregatedCurve {
  std::vector<BetaMean> means;       // ascending beta, successful points only
  std::vector<CurvePoint> envelope;  // means sorted by mi_xz, mi_zy made nondecreasing
  std::vector<CurvePoint> curve() const;  // means as knee-detection input
};

AggregatedCurve curve_aggregate(std::span<const IBCurvePoint> points);

// Columns: beta, seed, mi_xz_bits, mi_zy_bits, clean_accuracy, model_id, status.
CsvTable sweep_table(std::span<const IBCurvePoint> points);
std::vector<IBCurvePoint> sweep_points_from_table(const CsvTable& table);

}  // namespace iblab
