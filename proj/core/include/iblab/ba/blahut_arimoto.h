#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "iblab/csv.h"
#include "iblab/tensor.h"

namespace iblab {

/// Joint distribution p(x, y) over finite alphabets, stored as [|X| x |Y|].
struct DiscreteJoint {
  Tensor p_xy;

  std::size_t nx() const { return p_xy.rows(); }
  std::size_t ny() const { return p_xy.cols(); }
  // Nonnegative, finite, sums to 1 within 1e-12.
  void validate() const;
};

struct BAEncoder {
  Tensor p_z_given_x;           // [|X| x |Z|]
  std::vector<double> p_z;      // [|Z|]
  Tensor p_y_given_z;           // [|Z| x |Y|]
};

struct BAConfig {
  std::size_t cardinality = 10;
  double beta_ba = 1.0;  // weight on the prediction distortion
  double tol = 1e-9;     // max absolute change of p(z|x) between iterations
  int max_iter = 5000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BAResult {
  BAEncoder encoder;
  double mi_xz_bits = 0.0;
  double mi_zy_bits = 0.0;
  bool converged = false;
  int iterations = 0;
  // I(X;Z) + beta_ba * E[KL(p(y|x) || p(y|z))] in nats after every update;
  // nonincreasing up to rounding.
  std::vector<double> objective_trace;
};

// Floor applied to p(y|z) before taking KL divergences.
inline constexpr double kBaFloor = 1e-12;

// sum p log(p / q) in nats; q is floored at kBaFloor and renormalized.
double kl_discrete(std::span<const double> p, std::span<const double> q);

/// Blahut-Arimoto iteration for the information bottleneck. Without
/// `warm_start` the encoder starts as a softmax of seeded Gaussian noise;
/// with it, the given encoder is slightly perturbed (seeded) so that merged
/// clusters can split again at a larger multiplier.
BAResult ba_solve(const DiscreteJoint& joint, const BAConfig& config,
                  const BAEncoder* warm_start = nullptr);

// I(X;Z) and I(Z;Y) in bits recomputed from an encoder and the joint.
std::pair<double, double> ba_information(const DiscreteJoint& joint, const BAEncoder& encoder);

// Clusters with mass above `threshold`; states whose decoders p(y|z) agree
// within 1e-6 count once.
std::size_t effective_support(const BAEncoder& encoder, double threshold = 1e-6);

struct BACurvePoint {
  double beta_ba = 0.0;
  double beta_lagrangian = 0.0;  // 1 / beta_ba
  double mi_xz_bits = 0.0;
  double mi_zy_bits = 0.0;
  bool converged = false;
  int iterations = 0;
  std::size_t support = 0;
};

/// Solves each multiplier of an ascending grid, warm-starting from the
/// previous point unless `cold_start` is set.
std::vector<BACurvePoint> ba_curve(const DiscreteJoint& joint, std::span<const double> grid,
                                   const BAConfig& base, bool cold_start = false);

// Columns: beta_ba, beta_lagrangian, mi_xz_bits, mi_zy_bits, converged, iterations.
CsvTable ba_curve_table(const std::vector<BACurvePoint>& points);
// Inverse of ba_curve_table; `support` is not stored and reads back as 0.
std::vector<BACurvePoint> ba_curve_from_table(const CsvTable& table);

}  // namespace iblab
