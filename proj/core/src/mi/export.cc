#include "iblab/mi/export.h"

#include "iblab/hashing.h"

namespace iblab {

std::string params_digest(const nlohmann::json& params) {
  nlohmann::json settings = params;
  settings.erase("raw_bits");
  settings.erase("label_entropy_bits");
  return sha256_hex(settings.dump()).substr(0, 16);
}

CsvTable mi_table(const std::vector<MiRecord>& records) {
  CsvTable t;
  t.schema = "iblab.mi";
  t.columns = {"dataset", "model_id", "layer", "method", "params_digest", "value_bits"};
  for (const auto& r : records) {
    t.rows.push_back({r.dataset, r.model_id, r.layer, to_string(r.estimate.method),
                      params_digest(r.estimate.params), format_double(r.estimate.value_bits)});
  }
  return t;
}

}  // namespace iblab
