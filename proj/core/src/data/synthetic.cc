#include "iblab/data/synthetic.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "iblab/error.h"
#include "iblab/info.h"

namespace iblab {

namespace {

std::array<Vec3, kSyntheticInputs> make_vertices() {
  const double phi = std::numbers::phi;
  std::array<Vec3, kSyntheticInputs> v{};
  std::size_t k = 0;
  for (double a : {-1.0, 1.0}) {
    for (double b : {-1.0, 1.0}) {
      v[k++] = {0.0, a, b * phi};
      v[k++] = {a, b * phi, 0.0};
      v[k++] = {b * phi, 0.0, a};
    }
  }
  for (Vec3& u : v) {
    const double norm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    for (double& c : u) c /= norm;
  }
  return v;
}

using Gram = std::array<std::array<double, kSyntheticInputs>, kSyntheticInputs>;

const Gram& gram() {
  static const Gram g = [] {
    Gram out{};
    const auto& v = icosahedron_vertices();
    for (std::size_t i = 0; i < kSyntheticInputs; ++i)
      for (std::size_t j = 0; j < kSyntheticInputs; ++j)
        out[i][j] = v[i][0] * v[j][0] + v[i][1] * v[j][1] + v[i][2] * v[j][2];
    return out;
  }();
  return g;
}

double sigmoid(double t) {
  return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

const std::vector<double>& pattern_invariants() {
  static const std::vector<double> g = [] {
    std::vector<double> out(kSyntheticPatterns);
    for (std::size_t p = 0; p < kSyntheticPatterns; ++p) {
      const auto x = synthetic_pattern(p);
      out[p] = icosahedral_invariant(x);
    }
    return out;
  }();
  return g;
}

struct JointStats {
  double mi_bits;
  double positive_rate;
};

JointStats joint_stats(double sharpness, double threshold) {
  const auto& g = pattern_invariants();
  const double px = 1.0 / static_cast<double>(kSyntheticPatterns);
  double positive = 0.0;
  double conditional = 0.0;
  for (double gi : g) {
    const double p1 = sigmoid(sharpness * (gi - threshold));
    positive += px * p1;
    conditional += px * info::binary_entropy_bits(p1);
  }
  return {info::binary_entropy_bits(positive) - conditional, positive};
}

}  // namespace

const std::array<Vec3, kSyntheticInputs>& icosahedron_vertices() {
  static const std::array<Vec3, kSyntheticInputs> v = make_vertices();
  return v;
}

double icosahedral_invariant(std::span<const double> x) {
  if (x.size() != kSyntheticInputs) fail(ErrorKind::kConfig, "invariant needs 12 inputs");
  const Gram& g = gram();
  double total = 0.0;
  for (std::size_t i = 0; i < kSyntheticInputs; ++i) {
    if (x[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < kSyntheticInputs; ++j) total += x[i] * x[j] * g[i][j];
  }
  return total;
}

std::array<double, kSyntheticInputs> synthetic_pattern(std::size_t pattern) {
  std::array<double, kSyntheticInputs> x{};
  for (std::size_t j = 0; j < kSyntheticInputs; ++j) x[j] = static_cast<double>((pattern >> j) & 1u);
  return x;
}

double synthetic_label_probability(const SyntheticSpec& spec, double invariant) {
  return sigmoid(spec.sharpness * (invariant - spec.threshold));
}

LabeledDataset gen_synthetic(const SyntheticSpec& spec) {
  if (!(spec.sharpness >= 0.0) || !std::isfinite(spec.sharpness)) {
    fail(ErrorKind::kConfig, "synthetic sharpness must be a finite nonnegative number");
  }
  LabeledDataset d;
  d.name = "synthetic";
  d.num_classes = 2;
  d.features = Tensor({kSyntheticPatterns, kSyntheticInputs});
  d.labels.resize(kSyntheticPatterns);
  Tensor joint({kSyntheticPatterns, 2});
  const double px = 1.0 / static_cast<double>(kSyntheticPatterns);
  const auto& g = pattern_invariants();
  Rng rng(Rng::derive(spec.seed, 0x5e7));
  for (std::size_t p = 0; p < kSyntheticPatterns; ++p) {
    const auto x = synthetic_pattern(p);
    std::copy(x.begin(), x.end(), d.features.row(p).begin());
    const double p1 = synthetic_label_probability(spec, g[p]);
    joint(p, 0) = px * (1.0 - p1);
    joint(p, 1) = px * p1;
    d.labels[p] = rng.bernoulli(p1) ? 1 : 0;
  }
  d.exact_joint = std::move(joint);
  return d;
}

double synthetic_mutual_information_bits(const SyntheticSpec& spec) {
  return joint_stats(spec.sharpness, spec.threshold).mi_bits;
}

double synthetic_positive_rate(const SyntheticSpec& spec) {
  return joint_stats(spec.sharpness, spec.threshold).positive_rate;
}

SyntheticSpec calibrate_synthetic(double target_mi_bits, double target_balance,
                                  std::uint64_t seed) {
  if (!(target_mi_bits > 0.0 && target_mi_bits <= 1.0)) {
    fail(ErrorKind::kConfig, "target MI must lie in (0, 1] bits");
  }
  if (!(target_balance > 0.0 && target_balance < 1.0)) {
    fail(ErrorKind::kConfig, "target balance must lie in (0, 1)");
  }
  // Distinct invariant levels (exact values are sums of +-1/sqrt(5) and -1,
  // so rounding to 1e-9 merges only floating-point duplicates).
  std::vector<double> levels = pattern_invariants();
  std::sort(levels.begin(), levels.end());
  std::vector<double> distinct;
  for (double v : levels) {
    if (distinct.empty() || v - distinct.back() > 1e-9) distinct.push_back(v);
  }
  const double n = static_cast<double>(kSyntheticPatterns);
  double best_gap_error = INFINITY;
  double threshold = 0.0;
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    const double mid = 0.5 * (distinct[i] + distinct[i + 1]);
    const auto above = std::count_if(levels.begin(), levels.end(), [mid](double v) { return v > mid; });
    const double err = std::abs(static_cast<double>(above) / n - target_balance);
    if (err < best_gap_error) {
      best_gap_error = err;
      threshold = mid;
    }
  }

  const double ceiling = joint_stats(1e6, threshold).mi_bits;
  if (target_mi_bits > ceiling) {
    std::ostringstream msg;
    msg << "calibration target " << target_mi_bits
        << " bits is unreachable; nearest achievable MI(X;Y) is " << ceiling << " bits";
    fail(ErrorKind::kNumerical, msg.str());
  }
  // MI grows monotonically with sharpness at a fixed threshold.
  double lo = 0.0, hi = 1.0;
  while (joint_stats(hi, threshold).mi_bits < target_mi_bits) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (joint_stats(mid, threshold).mi_bits < target_mi_bits ? lo : hi) = mid;
  }
  return SyntheticSpec{hi, threshold, seed};
}

void write_synthetic_csv(const std::filesystem::path& path, const LabeledDataset& data) {
  if (!data.exact_joint) fail(ErrorKind::kConfig, "dataset has no exact joint to export");
  std::ostringstream out;
  out.precision(17);
  for (std::size_t j = 0; j < data.dim(); ++j) out << "x" << j << ",";
  out << "p_y1,label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) out << static_cast<int>(data.features(i, j)) << ",";
    const Tensor& joint = *data.exact_joint;
    const double p1 = joint(i, 1) / (joint(i, 0) + joint(i, 1));
    out << p1 << "," << data.labels[i] << "\n";
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) fail(ErrorKind::kIo, "cannot write " + path.string());
  f << out.str();
}

}  // namespace iblab
