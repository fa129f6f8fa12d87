#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "iblab/data/synthetic.h"
#include "iblab/error.h"
#include "iblab/mi/binning.h"
#include "iblab/mi/dv.h"
#include "iblab/mi/estimate.h"
#include "iblab/mi/export.h"
#include "iblab/mi/kde.h"
#include "test_util.h"

namespace iblab {
namespace {

KdeConfig fixed(double sigma) {
  KdeConfig c;
  c.mode = BandwidthMode::kFixed;
  c.sigma = sigma;
  return c;
}

Tensor gaussian_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
  Tensor z({n, d});
  Rng rng(seed);
  for (auto& v : z.storage()) v = rng.normal();
  return z;
}

TEST(Kde, IdenticalPointsCarryNothing) {
  const Tensor z({50, 3}, 0.25);
  EXPECT_EQ(kde_mi_xz(z, fixed(1.0)).value_bits, 0.0);
  const auto scaled = kde_mi_xz(z);
  EXPECT_EQ(scaled.value_bits, 0.0);
  EXPECT_FALSE(scaled.warnings.empty());
}

TEST(Kde, WellSeparatedPointsApproachLogN) {
  const std::size_t n = 64;
  Tensor z({n, 2});
  for (std::size_t i = 0; i < n; ++i) {
    z(i, 0) = static_cast<double>(i % 8) * 10.0;
    z(i, 1) = static_cast<double>(i / 8) * 10.0;
  }
  EXPECT_NEAR(kde_mi_xz(z, fixed(0.5)).value_bits, std::log2(n), 0.02 * std::log2(n));
}

TEST(Kde, TwoPointClosedForm) {
  const double d = 1.3, sigma = 0.8;
  const Tensor z = Tensor::matrix(2, 1, {0.0, d});
  const double expected = -std::log((1 + std::exp(-d * d / (2 * sigma * sigma))) / 2) / std::log(2.0);
  EXPECT_NEAR(kde_mi_xz(z, fixed(sigma)).value_bits, expected, 1e-12);
}

TEST(Kde, PermutationAndRotationInvariant) {
  const Tensor z = gaussian_cloud(200, 2, 1);
  std::vector<int> labels(200);
  for (std::size_t i = 0; i < 200; ++i) labels[i] = z(i, 0) > 0 ? 1 : 0;
  Tensor rotated = z, permuted({200, 2});
  std::vector<int> permuted_labels(200);
  const double a = 0.7;
  for (std::size_t i = 0; i < 200; ++i) {
    rotated(i, 0) = std::cos(a) * z(i, 0) - std::sin(a) * z(i, 1);
    rotated(i, 1) = std::sin(a) * z(i, 0) + std::cos(a) * z(i, 1);
    permuted(i, 0) = z(199 - i, 0);
    permuted(i, 1) = z(199 - i, 1);
    permuted_labels[i] = labels[199 - i];
  }
  const double base = kde_mi_xz(z).value_bits;
  EXPECT_NEAR(kde_mi_xz(rotated).value_bits, base, 1e-9);
  EXPECT_NEAR(kde_mi_xz(permuted).value_bits, base, 1e-9);
  const double base_zy = kde_mi_zy(z, labels).value_bits;
  EXPECT_NEAR(kde_mi_zy(rotated, labels).value_bits, base_zy, 1e-9);
  EXPECT_NEAR(kde_mi_zy(permuted, permuted_labels).value_bits, base_zy, 1e-9);
}

TEST(Kde, IndependentLabelsGiveNearZero) {
  const Tensor z = gaussian_cloud(4000, 2, 2);
  std::vector<int> labels(4000);
  Rng rng(3);
  for (auto& l : labels) l = static_cast<int>(rng.below(2));
  EXPECT_LT(kde_mi_zy(z, labels).value_bits, 0.05);
}

TEST(Kde, SeparatedClassClustersGiveLabelEntropy) {
  const std::size_t per = 50;
  Tensor z({10 * per, 2});
  std::vector<int> labels(10 * per);
  Rng rng(4);
  for (std::size_t c = 0; c < 10; ++c) {
    for (std::size_t i = 0; i < per; ++i) {
      const std::size_t r = c * per + i;
      z(r, 0) = 100.0 * static_cast<double>(c) + 0.01 * rng.normal();
      z(r, 1) = 0.01 * rng.normal();
      labels[r] = static_cast<int>(c);
    }
  }
  const auto est = kde_mi_zy(z, labels);
  EXPECT_NEAR(est.value_bits, std::log2(10.0), 0.05 * std::log2(10.0));
  EXPECT_LE(est.value_bits, label_entropy(labels));
}

TEST(Kde, NeverExceedsBatchLabelEntropy) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Tensor z = gaussian_cloud(300, 3, seed);
    std::vector<int> labels(300);
    for (std::size_t i = 0; i < 300; ++i) labels[i] = static_cast<int>((z(i, 0) > 0) + 2 * (z(i, 1) > 0));
    EXPECT_LE(kde_mi_zy(z, labels).value_bits, label_entropy(labels));
  }
}

TEST(Kde, SingletonClassWarns) {
  const Tensor z = gaussian_cloud(20, 2, 5);
  std::vector<int> labels(20, 0);
  labels[7] = 1;
  const auto est = kde_mi_zy(z, labels);
  EXPECT_FALSE(est.warnings.empty());
  EXPECT_TRUE(std::isfinite(est.value_bits));
}

TEST(Binning, IdenticalDiscreteSidesGiveEntropy) {
  const std::size_t n = 16;
  Tensor a({n, 1});
  std::vector<int> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = static_cast<double>(i % 4);
    b[i] = static_cast<int>(i % 4);
  }
  EXPECT_NEAR(binning_mi(a, b, 30).value_bits, 2.0, 1e-12);
  EXPECT_NEAR(binning_mi(a, a, 30).value_bits, 2.0, 1e-12);
}

TEST(Binning, IndependentSidesNearZero) {
  const std::size_t n = 20000;
  Tensor a({n, 1});
  std::vector<int> b(n);
  Rng rng(6);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.uniform();
    b[i] = static_cast<int>(rng.below(2));
  }
  // Plug-in bias is about (bins - 1)(classes - 1) / (2 N ln 2) bits.
  const double bias = 29.0 * 1.0 / (2.0 * n * std::log(2.0));
  EXPECT_LT(binning_mi(a, b, 30).value_bits, 4 * bias);
}

TEST(Binning, ExactJointOfSyntheticTask) {
  const auto data = gen_synthetic(calibrate_synthetic(0.99, 0.5));
  const Tensor& joint = *data.exact_joint;
  // Every pattern appears once per label, weighted by its joint mass.
  const std::size_t n = data.size();
  Tensor a({2 * n, kSyntheticInputs});
  std::vector<int> b(2 * n);
  std::vector<double> w(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    for (int y = 0; y < 2; ++y) {
      const std::size_t r = 2 * k + static_cast<std::size_t>(y);
      for (std::size_t j = 0; j < kSyntheticInputs; ++j) a(r, j) = data.features(k, j);
      b[r] = y;
      w[r] = joint(k, static_cast<std::size_t>(y));
    }
  }
  const double exact = synthetic_mutual_information_bits(calibrate_synthetic(0.99, 0.5));
  EXPECT_NEAR(binning_mi(a, b, 2, w).value_bits, exact, 0.01);
}

TEST(Binning, NondecreasingUnderNestedRefinement) {
  const Tensor a = gaussian_cloud(500, 2, 7);
  std::vector<int> b(500);
  for (std::size_t i = 0; i < 500; ++i) b[i] = a(i, 0) + 0.3 * a(i, 1) > 0 ? 1 : 0;
  double previous = -1.0;
  for (int bins : {2, 4, 8, 16, 32, 64}) {
    const double v = binning_mi(a, b, bins).value_bits;
    EXPECT_GE(v, previous - 1e-12) << bins;
    previous = v;
  }
}

TEST(Binning, ConstantColumnGoesToOneBin) {
  const Tensor a({10, 2}, 0.5);
  const auto codes = bin_codes(a, 30);
  for (int c : codes) EXPECT_EQ(c, codes[0]);
}

TEST(ClosedForm, GaussianValues) {
  EXPECT_EQ(gaussian_mi_closed_form(0.0).value_nats(), 0.0);
  EXPECT_NEAR(gaussian_mi_closed_form(0.5).value_nats(), 0.14384, 1e-5);
  EXPECT_NEAR(gaussian_mi_closed_form(0.9).value_nats(), 0.8304, 1e-4);
  EXPECT_EQ(gaussian_mi_closed_form(-0.7).value_bits, gaussian_mi_closed_form(0.7).value_bits);
  EXPECT_THROW(gaussian_mi_closed_form(1.0), Error);
  EXPECT_THROW(gaussian_mi_closed_form(-1.2), Error);
}

TEST(LabelEntropy, Values) {
  std::vector<int> ten(1000);
  for (std::size_t i = 0; i < ten.size(); ++i) ten[i] = static_cast<int>(i % 10);
  EXPECT_NEAR(label_entropy(ten), std::log2(10.0), 1e-12);
  EXPECT_EQ(label_entropy(std::vector<int>(5, 3)), 0.0);
  EXPECT_NEAR(label_entropy(std::vector<int>{0, 1, 1, 1}), 0.8113, 1e-4);
}

TEST(Estimate, ClampsButKeepsRawValue) {
  const auto e = make_estimate(MiMethod::kKde, -0.01);
  EXPECT_EQ(e.value_bits, 0.0);
  EXPECT_DOUBLE_EQ(e.raw_bits(), -0.01);
  EXPECT_THROW(make_estimate(MiMethod::kKde, NAN), Error);
}

TEST(Dv, ZeroCriticGivesZeroBound) {
  EXPECT_EQ(dv_bound_value(Tensor({64, 1}, 0.0), Tensor({64, 1}, 0.0)), 0.0);
}

TEST(Dv, OptimalCriticRecoversGaussianMi) {
  // With T the true log density ratio the bound equals the MI.
  const double rho = 0.8;
  const std::size_t n = 200000;
  Rng rng(8);
  auto log_ratio = [&](double x, double z) {
    const double q = (x * x - 2 * rho * x * z + z * z) / (1 - rho * rho);
    return -0.5 * std::log(1 - rho * rho) - 0.5 * q + 0.5 * (x * x + z * z);
  };
  Tensor tj({n, 1}), tm({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.normal(), e = rng.normal();
    const double z = rho * x + std::sqrt(1 - rho * rho) * e;
    tj[i] = log_ratio(x, z);
    tm[i] = log_ratio(rng.normal(), rng.normal());
  }
  EXPECT_NEAR(dv_bound_value(tj, tm), gaussian_mi_closed_form(rho).value_nats(), 0.02);
}

TEST(Dv, TrainedEstimateOnCorrelatedGaussians) {
  const double rho = 0.5;
  const std::size_t n = 10000;
  Tensor x({n, 1}), z({n, 1});
  Rng rng(9);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    z[i] = rho * x[i] + std::sqrt(1 - rho * rho) * rng.normal();
  }
  StatisticNet net(1, 1, {32, 32}, 1);
  const auto est = dv_train_estimate(x, z, net);
  EXPECT_NEAR(est.value_nats(), gaussian_mi_closed_form(rho).value_nats(), 0.1);
}

TEST(Dv, LowerBoundOnDiscreteJoint) {
  // 4x4 joint with MI well below its entropies; one-hot encodings.
  const double p[4][4] = {{0.15, 0.03, 0.02, 0.05},
                          {0.02, 0.14, 0.05, 0.04},
                          {0.03, 0.04, 0.13, 0.05},
                          {0.05, 0.03, 0.02, 0.15}};
  double exact = 0.0, px[4] = {}, pz[4] = {};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      px[i] += p[i][j];
      pz[j] += p[i][j];
    }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) exact += p[i][j] * std::log(p[i][j] / (px[i] * pz[j]));
  const std::size_t n = 8000;
  Tensor x({n, 4}, 0.0), z({n, 4}, 0.0);
  Rng rng(10);
  for (std::size_t r = 0; r < n; ++r) {
    double u = rng.uniform(), acc = 0.0;
    int cell = 15;
    for (int k = 0; k < 16; ++k) {
      acc += p[k / 4][k % 4];
      if (u < acc) {
        cell = k;
        break;
      }
    }
    x(r, static_cast<std::size_t>(cell / 4)) = 1.0;
    z(r, static_cast<std::size_t>(cell % 4)) = 1.0;
  }
  StatisticNet net(4, 4, {32}, 2);
  DvTrainConfig cfg;
  cfg.steps = 1500;
  const auto est = dv_train_estimate(x, z, net, cfg);
  EXPECT_LE(est.value_nats(), exact + 0.05);
  EXPECT_GT(est.value_nats(), 0.5 * exact);
}

TEST(Export, TableAndDigest) {
  auto a = make_estimate(MiMethod::kKde, 1.25, {{"scale", 0.1}});
  auto b = make_estimate(MiMethod::kKde, 2.5, {{"scale", 0.1}});
  EXPECT_EQ(params_digest(a.params), params_digest(b.params));
  EXPECT_EQ(params_digest(a.params).size(), 16u);
  const auto t = mi_table({{"mnist", "m1", "I(X;Z)", a}});
  EXPECT_EQ(t.schema, "iblab.mi");
  EXPECT_EQ(t.columns, (std::vector<std::string>{"dataset", "model_id", "layer", "method", "params_digest", "value_bits"}));
  EXPECT_EQ(t.rows.at(0).at(t.column("value_bits")), "1.25");
}

}  // namespace
}  // namespace iblab
