#pragma once

#include <string>
#include <vector>

#include "iblab/csv.h"
#include "iblab/mi/estimate.h"

namespace iblab {

struct MiRecord {
  std::string dataset;
  std::string model_id;
  std::string layer;
  MIEstimate estimate;
};

// First 16 hex digits of sha256 over the canonical JSON of the estimator
// settings (measured values such as raw_bits are excluded).
std::string params_digest(const nlohmann::json& params);

// Columns: dataset, model_id, layer, method, params_digest, value_bits.
CsvTable mi_table(const std::vector<MiRecord>& records);

}  // namespace iblab
