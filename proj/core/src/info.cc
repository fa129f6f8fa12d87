#include "iblab/info.h"

#include <cmath>
#include <vector>

namespace iblab::info {

double entropy_bits(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

double binary_entropy_bits(double p) {
  const double q[2] = {p, 1.0 - p};
  return entropy_bits(q);
}

std::vector<double> row_marginal(const Tensor& joint) {
  std::vector<double> out(joint.rows(), 0.0);
  for (std::size_t r = 0; r < joint.rows(); ++r)
    for (double v : joint.row(r)) out[r] += v;
  return out;
}

std::vector<double> col_marginal(const Tensor& joint) {
  std::vector<double> out(joint.cols(), 0.0);
  for (std::size_t r = 0; r < joint.rows(); ++r) {
    auto row = joint.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c];
  }
  return out;
}

double mutual_information_bits(const Tensor& joint) {
  const auto pa = row_marginal(joint);
  const auto pb = col_marginal(joint);
  double mi = 0.0;
  for (std::size_t r = 0; r < joint.rows(); ++r) {
    auto row = joint.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double p = row[c];
      if (p > 0.0) mi += p * std::log2(p / (pa[r] * pb[c]));
    }
  }
  return mi;
}

}  // namespace iblab::info
