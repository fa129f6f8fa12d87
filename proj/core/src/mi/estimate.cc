#include "iblab/mi/estimate.h"

#include <cmath>
#include <map>

#include "iblab/error.h"
#include "iblab/info.h"

namespace iblab {

std::string to_string(MiMethod method) {
  switch (method) {
    case MiMethod::kKde: return "kde";
    case MiMethod::kBinning: return "binning";
    case MiMethod::kDv: return "dv";
    case MiMethod::kExact: return "exact";
  }
  return "unknown";
}

double MIEstimate::value_nats() const { return info::bits_to_nats(value_bits); }

double MIEstimate::raw_bits() const {
  return params.contains("raw_bits") ? params["raw_bits"].get<double>() : value_bits;
}

MIEstimate make_estimate(MiMethod method, double raw_bits, nlohmann::json params) {
  if (!std::isfinite(raw_bits)) fail(ErrorKind::kNumerical, to_string(method) + " estimate is not finite");
  MIEstimate e;
  e.method = method;
  e.params = std::move(params);
  e.params["raw_bits"] = raw_bits;
  e.value_bits = std::max(raw_bits, 0.0);
  return e;
}

MIEstimate gaussian_mi_closed_form(double rho) {
  if (!(std::abs(rho) < 1.0)) fail(ErrorKind::kConfig, "correlation must satisfy |rho| < 1");
  const double nats = -0.5 * std::log1p(-rho * rho);
  return make_estimate(MiMethod::kExact, info::nats_to_bits(nats), {{"rho", rho}});
}

double label_entropy(std::span<const int> labels) {
  if (labels.empty()) fail(ErrorKind::kData, "label entropy of an empty set");
  std::map<int, double> counts;
  for (int y : labels) counts[y] += 1.0;
  std::vector<double> p;
  p.reserve(counts.size());
  for (const auto& [label, count] : counts) p.push_back(count / static_cast<double>(labels.size()));
  return info::entropy_bits(p);
}

}  // namespace iblab
