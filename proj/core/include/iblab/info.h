#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "iblab/tensor.h"

// Plug-in information measures on discrete probability tables.
namespace iblab::info {

inline constexpr double kLn2 = std::numbers::ln2;

inline double nats_to_bits(double nats) { return nats / kLn2; }
inline double bits_to_nats(double bits) { return bits * kLn2; }

// -sum p log2 p, skipping zero entries.
double entropy_bits(std::span<const double> p);
double binary_entropy_bits(double p);

// MI between the row and column variables of a joint table [A x B]. The
// table must be nonnegative; it is used as given (callers normalize).
double mutual_information_bits(const Tensor& joint);

// Row and column marginals of a joint table.
std::vector<double> row_marginal(const Tensor& joint);
std::vector<double> col_marginal(const Tensor& joint);

}  // namespace iblab::info
