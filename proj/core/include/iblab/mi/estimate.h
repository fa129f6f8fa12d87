#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace iblab {

enum class MiMethod { kKde, kBinning, kDv, kExact };

std::string to_string(MiMethod method);

/// A mutual-information value in bits. `value_bits` is the reported figure,
/// clamped to be nonnegative; `params["raw_bits"]` keeps the unclamped value.
struct MIEstimate {
  double value_bits = 0.0;
  MiMethod method = MiMethod::kExact;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> warnings;

  double value_nats() const;
  double raw_bits() const;
};

MIEstimate make_estimate(MiMethod method, double raw_bits, nlohmann::json params = nlohmann::json::object());

// -0.5 ln(1 - rho^2): MI of a bivariate standard Gaussian with correlation rho.
MIEstimate gaussian_mi_closed_form(double rho);

// Plug-in entropy of the empirical label distribution, in bits.
double label_entropy(std::span<const int> labels);

}  // namespace iblab
