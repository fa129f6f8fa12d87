#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>

#include "iblab/data/dataset.h"

namespace iblab {

inline constexpr std::size_t kSyntheticInputs = 12;
inline constexpr std::size_t kSyntheticPatterns = std::size_t{1} << kSyntheticInputs;

/// Labeling rule p(y=1|x) = sigmoid(sharpness * (g(x) - threshold)), where g
/// is the pairwise vertex-alignment invariant of the occupied vertices.
struct SyntheticSpec {
  double sharpness = 0.0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
};

using Vec3 = std::array<double, 3>;

// Unit vectors to the 12 vertices of a regular icosahedron.
const std::array<Vec3, kSyntheticInputs>& icosahedron_vertices();

// g(x) = sum_{i<j} x_i x_j <u_i, u_j>. Invariant under every vertex
// permutation induced by a symmetry of the icosahedron.
double icosahedral_invariant(std::span<const double> x);

// Binary pattern with index `pattern`: x_j = bit j of the index.
std::array<double, kSyntheticInputs> synthetic_pattern(std::size_t pattern);

double synthetic_label_probability(const SyntheticSpec& spec, double invariant);

/// All 4096 patterns with p(x) = 1/4096, the exact joint, and one label per
/// pattern sampled from p(y|x) with `spec.seed`.
LabeledDataset gen_synthetic(const SyntheticSpec& spec);

// Exact MI(X;Y) in bits and p(y=1) implied by a spec, from the 4096-row joint.
double synthetic_mutual_information_bits(const SyntheticSpec& spec);
double synthetic_positive_rate(const SyntheticSpec& spec);

/// Chooses the threshold in the gap between invariant levels whose
/// deterministic label split is closest to `target_balance`, then bisects the
/// sharpness until the exact MI(X;Y) equals `target_mi_bits`. Numerical error
/// (naming the nearest achievable value) when the target is out of reach.
SyntheticSpec calibrate_synthetic(double target_mi_bits, double target_balance,
                                  std::uint64_t seed = 0);

// CSV: x0..x11, p_y1, label (4096 rows).
void write_synthetic_csv(const std::filesystem::path& path, const LabeledDataset& data);

}  // namespace iblab
