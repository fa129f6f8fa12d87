#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "iblab/app/config.h"
#include "iblab/app/run_record.h"
#include "iblab/data/dataset.h"

namespace iblab {

// ba-curve, train, sweep, knee, attack, mi-eval, report
const std::vector<std::string>& subcommand_names();

struct CommandOptions {
  bool force = false;          // rerun even when a finished run with the same digest exists
  std::ostream* out = nullptr;  // progress and tables; std::cout when null
};

struct CommandOutcome {
  std::filesystem::path dir;  // empty when nothing was written
  RunRecord record;
  bool cached = false;
};

/// Runs one pipeline stage. Artifacts go to a digest-named directory under
/// config.output_dir, next to the resolved config and a run record. A stage
/// that fails keeps what it already wrote, marks its record failed and
/// rethrows. `report` always reruns and reads only stored CSVs.
CommandOutcome run_subcommand(const std::string& name, const ExperimentConfig& config,
                              const CommandOptions& options = {});

struct ExperimentData {
  LabeledDataset train;  // training pool, partitioned by `split`
  SplitIndices split;
  LabeledDataset test;
  std::vector<std::size_t> test_indices;
  std::vector<std::filesystem::path> files;  // inputs read from disk
};

/// MNIST-style sets: the training file split 4:1 into train/validation and
/// the test file. Synthetic: the 4096 patterns split 4:1:1, the last part
/// serving as the test set.
ExperimentData load_experiment_data(const DatasetConfig& config, std::uint64_t seed);

}  // namespace iblab
