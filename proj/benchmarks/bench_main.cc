#include <benchmark/benchmark.h>

#include <vector>

#include "iblab/attacks/attacks.h"
#include "iblab/autodiff.h"
#include "iblab/ba/blahut_arimoto.h"
#include "iblab/data/synthetic.h"
#include "iblab/mi/kde.h"
#include "iblab/rng.h"
#include "iblab/sweep/knee.h"
#include "iblab/train/model.h"
#include "iblab/train/objectives.h"

namespace {

using namespace iblab;

Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t({rows, cols});
  for (double& v : t.data()) v = rng.uniform(0.0, 1.0);
  return t;
}

Batch random_batch(std::size_t n, std::size_t dim, int classes, std::uint64_t seed) {
  Batch b;
  b.features = random_matrix(n, dim, seed);
  for (std::size_t i = 0; i < n; ++i) {
    b.labels.push_back(static_cast<int>(i % classes));
    b.indices.push_back(i);
  }
  return b;
}

void BM_MnistForwardBackward(benchmark::State& state) {
  Model model(ModelSpec::mnist(), EncoderKind::kDeterministic, 0);
  const Batch b = random_batch(static_cast<std::size_t>(state.range(0)), 784, 10, 1);
  for (auto _ : state) {
    model.params().zero_grad();
    Tape tape;
    tape.backward(loss_normal(model, tape, b));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MnistForwardBackward)->Arg(32)->Arg(128);

void BM_BlahutArimoto(benchmark::State& state) {
  const Tensor joint = *gen_synthetic(calibrate_synthetic(0.99, 0.5, 0)).exact_joint;
  BAConfig c;
  c.cardinality = 10;
  c.beta_ba = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ba_solve(DiscreteJoint{joint}, c));
}
BENCHMARK(BM_BlahutArimoto)->Arg(2)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_KdeMutualInformation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor z = random_matrix(n, 10, 2);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kde_mi_xz(z));
    benchmark::DoNotOptimize(kde_mi_zy(z, labels));
  }
}
BENCHMARK(BM_KdeMutualInformation)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_FastGradientSign(benchmark::State& state) {
  Model model(ModelSpec::mnist(), EncoderKind::kDeterministic, 3);
  const ModelClassifier clf(model);
  const Batch b = random_batch(256, 784, 10, 4);
  for (auto _ : state) benchmark::DoNotOptimize(fgs(clf, b.features, b.labels, 0.1));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_FastGradientSign);

void BM_KneeDetect(benchmark::State& state) {
  std::vector<CurvePoint> curve;
  for (int i = 0; i < state.range(0); ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(state.range(0));
    curve.push_back({static_cast<double>(i), x, 1.0 - std::exp(-5.0 * x)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(knee_detect(curve));
}
BENCHMARK(BM_KneeDetect)->Arg(48)->Arg(4096);

}  // namespace
BENCHMARK_MAIN();
