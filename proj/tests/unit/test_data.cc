#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <numeric>
#include <set>

#include "iblab/data/dataset.h"
#include "iblab/data/idx.h"
#include "iblab/data/synthetic.h"
#include "iblab/error.h"
#include "test_util.h"

namespace iblab {
namespace {

using Perm = std::array<int, kSyntheticInputs>;

// Vertex permutation induced by an orthogonal map, or nullopt if the map
// does not send vertices to vertices.
std::optional<Perm> induced_permutation(const std::array<Vec3, 3>& m) {
  const auto& u = icosahedron_vertices();
  Perm p{};
  for (std::size_t i = 0; i < kSyntheticInputs; ++i) {
    Vec3 r{};
    for (int a = 0; a < 3; ++a) r[a] = m[a][0] * u[i][0] + m[a][1] * u[i][1] + m[a][2] * u[i][2];
    int match = -1;
    for (std::size_t j = 0; j < kSyntheticInputs; ++j) {
      const double d = std::hypot(r[0] - u[j][0], r[1] - u[j][1], r[2] - u[j][2]);
      if (d < 1e-9) match = static_cast<int>(j);
    }
    if (match < 0) return std::nullopt;
    p[i] = match;
  }
  return p;
}

// Rodrigues rotation about a unit axis.
std::array<Vec3, 3> rotation(const Vec3& k, double angle) {
  const double c = std::cos(angle), s = std::sin(angle), t = 1 - c;
  return {{{c + k[0] * k[0] * t, k[0] * k[1] * t - k[2] * s, k[0] * k[2] * t + k[1] * s},
           {k[1] * k[0] * t + k[2] * s, c + k[1] * k[1] * t, k[1] * k[2] * t - k[0] * s},
           {k[2] * k[0] * t - k[1] * s, k[2] * k[1] * t + k[0] * s, c + k[2] * k[2] * t}}};
}

std::vector<Perm> symmetry_generators() {
  const auto& u = icosahedron_vertices();
  const double five = 2 * M_PI / 5;
  std::vector<Perm> gens;
  for (auto m : {rotation(u[0], five), rotation(u[5], five)}) gens.push_back(*induced_permutation(m));
  gens.push_back(*induced_permutation({{{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}}}));
  return gens;
}

std::array<double, kSyntheticInputs> permuted(const std::array<double, kSyntheticInputs>& x, const Perm& p) {
  std::array<double, kSyntheticInputs> y{};
  for (std::size_t i = 0; i < kSyntheticInputs; ++i) y[p[i]] = x[i];
  return y;
}

double exact_mi_bits(const Tensor& joint) {
  std::vector<double> px(joint.rows(), 0.0), py(joint.cols(), 0.0);
  for (std::size_t i = 0; i < joint.rows(); ++i)
    for (std::size_t j = 0; j < joint.cols(); ++j) {
      px[i] += joint(i, j);
      py[j] += joint(i, j);
    }
  double mi = 0.0;
  for (std::size_t i = 0; i < joint.rows(); ++i)
    for (std::size_t j = 0; j < joint.cols(); ++j)
      if (joint(i, j) > 0) mi += joint(i, j) * std::log2(joint(i, j) / (px[i] * py[j]));
  return mi;
}

TEST(Synthetic, VerticesAreUnitAndUniform) {
  const auto& u = icosahedron_vertices();
  for (const auto& v : u) EXPECT_NEAR(std::hypot(v[0], v[1], v[2]), 1.0, 1e-12);
  // Every vertex has 5 nearest neighbours at the same angle.
  for (std::size_t i = 0; i < u.size(); ++i) {
    int near = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double dot = u[i][0] * u[j][0] + u[i][1] * u[j][1] + u[i][2] * u[j][2];
      if (i != j && std::abs(dot - 1 / std::sqrt(5.0)) < 1e-9) ++near;
    }
    EXPECT_EQ(near, 5);
  }
}

TEST(Synthetic, AllPatternsDistinct) {
  const auto data = gen_synthetic({2.0, 0.0, 0});
  ASSERT_EQ(data.size(), 4096u);
  std::set<std::vector<double>> rows;
  for (std::size_t i = 0; i < data.size(); ++i) rows.insert({data.features.row(i).begin(), data.features.row(i).end()});
  EXPECT_EQ(rows.size(), 4096u);
  double total = 0.0;
  for (double v : data.exact_joint->data()) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Synthetic, InvariantUnderSymmetryGroupElements) {
  const auto gens = symmetry_generators();
  // Five group elements: the generators and two products.
  std::vector<Perm> elements = gens;
  Perm ab{}, aab{};
  for (std::size_t i = 0; i < kSyntheticInputs; ++i) ab[i] = gens[1][gens[0][i]];
  for (std::size_t i = 0; i < kSyntheticInputs; ++i) aab[i] = ab[gens[0][i]];
  elements.push_back(ab);
  elements.push_back(aab);
  ASSERT_EQ(elements.size(), 5u);
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = synthetic_pattern(rng.below(kSyntheticPatterns));
    for (const auto& p : elements) {
      const auto y = permuted(x, p);
      EXPECT_NEAR(icosahedral_invariant(x), icosahedral_invariant(y), 1e-12);
    }
  }
}

TEST(Synthetic, DistinctLevelsAtMostOrbitCount) {
  const auto gens = symmetry_generators();
  std::vector<std::size_t> parent(kSyntheticPatterns);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
    return parent[a] == a ? a : parent[a] = find(parent[a]);
  };
  auto index_of = [](const std::array<double, kSyntheticInputs>& x) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < kSyntheticInputs; ++j)
      if (x[j] > 0.5) k |= std::size_t{1} << j;
    return k;
  };
  for (std::size_t k = 0; k < kSyntheticPatterns; ++k)
    for (const auto& g : gens) parent[find(k)] = find(index_of(permuted(synthetic_pattern(k), g)));
  std::set<std::size_t> orbits;
  std::set<long long> levels;
  for (std::size_t k = 0; k < kSyntheticPatterns; ++k) {
    orbits.insert(find(k));
    const auto x = synthetic_pattern(k);
    levels.insert(std::llround(icosahedral_invariant(x) * 1e9));
  }
  EXPECT_LE(levels.size(), orbits.size());
  EXPECT_LT(orbits.size(), kSyntheticPatterns);
}

TEST(Synthetic, LabelsDependOnlyOnInvariant) {
  const SyntheticSpec spec{3.0, 0.5, 0};
  const auto data = gen_synthetic(spec);
  std::map<long long, double> p_by_level;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto x = synthetic_pattern(k);
    const long long level = std::llround(icosahedral_invariant(x) * 1e9);
    const double p1 = (*data.exact_joint)(k, 1) / ((*data.exact_joint)(k, 0) + (*data.exact_joint)(k, 1));
    auto [it, inserted] = p_by_level.emplace(level, p1);
    if (!inserted) EXPECT_NEAR(it->second, p1, 1e-12);
  }
}

TEST(Synthetic, CalibratedSpecHitsTargets) {
  const SyntheticSpec spec = calibrate_synthetic(0.99, 0.5);
  const auto data = gen_synthetic(spec);
  const Tensor& joint = *data.exact_joint;
  double p1 = 0.0;
  for (std::size_t k = 0; k < joint.rows(); ++k) p1 += joint(k, 1);
  const double mi = exact_mi_bits(joint);
  EXPECT_GE(p1, 0.45);
  EXPECT_LE(p1, 0.55);
  EXPECT_GE(mi, 0.95);
  EXPECT_LE(mi, 1.00);
  EXPECT_NEAR(mi, 0.99, 0.02);
  EXPECT_NEAR(synthetic_mutual_information_bits(spec), mi, 1e-12);
  EXPECT_NEAR(synthetic_positive_rate(spec), p1, 1e-12);
}

TEST(Synthetic, ZeroSharpnessCarriesNoInformation) {
  EXPECT_NEAR(synthetic_mutual_information_bits({0.0, 0.3, 0}), 0.0, 1e-12);
}

TEST(Synthetic, InfiniteSharpnessMakesLabelsDeterministic) {
  const SyntheticSpec spec = calibrate_synthetic(0.99, 0.5);
  const SyntheticSpec hard{1e6, spec.threshold, 0};
  const double p1 = synthetic_positive_rate(hard);
  const double h = -(p1 * std::log2(p1) + (1 - p1) * std::log2(1 - p1));
  EXPECT_NEAR(synthetic_mutual_information_bits(hard), h, 1e-9);
  EXPECT_LE(h, 1.0);
}

TEST(Synthetic, UnreachableTargetIsNumericalError) {
  try {
    calibrate_synthetic(1.0, 0.5);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumerical);
  }
}

TEST(Synthetic, CsvExport) {
  testing::TempDir dir;
  const auto data = gen_synthetic({2.0, 0.0, 1});
  write_synthetic_csv(dir / "s.csv", data);
  std::ifstream in(dir / "s.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_GE(lines, 4097u);
}

// ---------------------------------------------------------------- IDX

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

struct Fixture {
  std::vector<std::uint8_t> images, labels;
};

Fixture two_image_fixture() {
  Fixture f;
  put_u32(f.images, kIdxImagesMagic);
  put_u32(f.images, 2);
  put_u32(f.images, 2);
  put_u32(f.images, 2);
  for (std::uint8_t v : {0, 255, 128, 7, 255, 0, 1, 2}) f.images.push_back(v);
  put_u32(f.labels, kIdxLabelsMagic);
  put_u32(f.labels, 2);
  f.labels.push_back(3);
  f.labels.push_back(9);
  return f;
}

TEST(Idx, HandBuiltFixture) {
  testing::TempDir dir;
  const auto f = two_image_fixture();
  write_bytes(dir / "img", f.images);
  write_bytes(dir / "lbl", f.labels);
  const auto data = load_idx(dir / "img", dir / "lbl", "fixture", 10);
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data.dim(), 4u);
  EXPECT_EQ(data.features(0, 0), 0.0);
  EXPECT_EQ(data.features(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(data.features(0, 2), 128.0 / 255.0);
  EXPECT_EQ(data.labels, (std::vector<int>{3, 9}));

  write_idx(dir / "img2", dir / "lbl2", data, 2, 2);
  const auto back = load_idx(dir / "img2", dir / "lbl2", "fixture", 10);
  EXPECT_EQ(back.features, data.features);
  EXPECT_EQ(back.labels, data.labels);
}

TEST(Idx, CorruptedFixturesAreRejected) {
  testing::TempDir dir;
  const auto good = two_image_fixture();
  std::vector<std::pair<std::string, Fixture>> bad;
  {
    auto f = good;
    f.images[3] = 0x01;  // label magic on the image file
    bad.emplace_back("bad image magic", f);
  }
  {
    auto f = good;
    f.labels[3] = 0x03;
    bad.emplace_back("bad label magic", f);
  }
  {
    auto f = good;
    f.labels[7] = 3;  // count mismatch
    f.labels.push_back(1);
    bad.emplace_back("count mismatch", f);
  }
  {
    auto f = good;
    f.images.resize(f.images.size() - 3);
    bad.emplace_back("truncated images", f);
  }
  {
    auto f = good;
    f.labels.resize(9);
    bad.emplace_back("truncated labels", f);
  }
  {
    auto f = good;
    f.images.resize(6);
    bad.emplace_back("truncated header", f);
  }
  for (const auto& [name, f] : bad) {
    write_bytes(dir / "img", f.images);
    write_bytes(dir / "lbl", f.labels);
    try {
      load_idx(dir / "img", dir / "lbl", "fixture", 10);
      ADD_FAILURE() << name << " was accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kData) << name;
      EXPECT_NE(std::string(e.what()).find(dir.path().string()), std::string::npos) << name << ": " << e.what();
    }
  }
}

TEST(Idx, RealMnistTrainingFile) {
  const auto files = mnist_files(default_data_dir(), true);
  if (!std::filesystem::exists(files.images)) GTEST_SKIP() << "MNIST not available under " << default_data_dir();
  const auto data = load_idx(files.images, files.labels, "mnist");
  EXPECT_EQ(data.size(), 60000u);
  EXPECT_EQ(data.dim(), 784u);
  EXPECT_EQ(data.num_classes, 10);
}

// -------------------------------------------------------------- splits

TEST(Split, FourToOneOnSixtyThousand) {
  const double ratio[] = {4, 1};
  const auto s = split(60000, ratio, 1);
  EXPECT_EQ(s.train().size(), 48000u);
  EXPECT_EQ(s.validation().size(), 12000u);
}

TEST(Split, PartitionAndDeterminism) {
  const double ratio[] = {4, 1, 1};
  const auto a = split(1001, ratio, 5), b = split(1001, ratio, 5), c = split(1001, ratio, 6);
  EXPECT_EQ(a.parts, b.parts);
  EXPECT_NE(a.parts, c.parts);
  std::vector<std::size_t> all;
  for (const auto& p : a.parts) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, iota_indices(1001));
}

LabeledDataset counting_dataset(std::size_t n) {
  LabeledDataset d;
  d.name = "count";
  d.features = Tensor({n, 1});
  d.labels.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    d.features[i] = static_cast<double>(i) / static_cast<double>(n);
    d.labels[i] = static_cast<int>(i % 2);
  }
  d.num_classes = 2;
  return d;
}

TEST(Minibatch, FullBatch) {
  const auto d = counting_dataset(37);
  const auto idx = iota_indices(37);
  MinibatchIterator it(d, idx, 37, 1, 0);
  Batch b;
  ASSERT_TRUE(it.next(b));
  EXPECT_EQ(b.labels.size(), 37u);
  EXPECT_FALSE(it.next(b));
}

TEST(Minibatch, SameSeedAndEpochSameSequence) {
  const auto d = counting_dataset(100);
  const auto idx = iota_indices(100);
  MinibatchIterator a(d, idx, 16, 3, 2), b(d, idx, 16, 3, 2), c(d, idx, 16, 3, 3);
  Batch x, y, z;
  bool differs = false;
  while (a.next(x)) {
    ASSERT_TRUE(b.next(y));
    ASSERT_TRUE(c.next(z));
    EXPECT_EQ(x.indices, y.indices);
    differs |= x.indices != z.indices;
  }
  EXPECT_TRUE(differs);
}

TEST(Minibatch, IndependentSecondBatchDiffers) {
  // Two 256-row draws from 60000 coincide with probability far below 1e-100.
  const auto d = counting_dataset(60000);
  const auto idx = iota_indices(60000);
  Rng rng(9);
  const auto a = sample_batch(d, idx, 256, rng);
  const auto b = sample_batch(d, idx, 256, rng);
  EXPECT_NE(a.indices, b.indices);
  std::set<std::size_t> distinct(a.indices.begin(), a.indices.end());
  EXPECT_EQ(distinct.size(), 256u);
}

TEST(Dataset, ValidateRejectsBadLabels) {
  auto d = counting_dataset(10);
  d.labels[3] = 2;
  try {
    d.validate();
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
}

}  // namespace
}  // namespace iblab
