#include "iblab/sweep/sweep.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "iblab/error.h"
#include "iblab/rng.h"

namespace iblab {

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) fail(ErrorKind::kConfig, "geometric grid needs 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    // 12 significant digits keeps grid values (and model ids) free of
    // round-off tails such as 0.009999999999999995.
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1)));
    out[i] = std::strtod(buf, nullptr);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

void SweepConfig::collect_errors(std::vector<std::string>& errors) const {
  if (betas.empty()) errors.push_back("sweep.betas must not be empty");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0) || !std::isfinite(betas[i])) errors.push_back("sweep.betas must be positive and finite");
    if (i > 0 && !(betas[i] > betas[i - 1])) errors.push_back("sweep.betas must be strictly ascending");
  }
  if (seeds.empty()) errors.push_back("sweep.seeds must not be empty");
  if (eval_samples < 2) errors.push_back("sweep.eval_samples must be >= 2");
  if (workers == 0) errors.push_back("sweep.workers must be >= 1");
  if (!(kde.scale > 0.0)) errors.push_back("sweep.kde_scale must be positive");
}

std::vector<IBCurvePoint> run_cells(std::span<const SweepCell> cells,
                                    const std::function<IBCurvePoint(const SweepCell&)>& run, std::size_t workers,
                                    const std::function<void(const IBCurvePoint&)>& on_result) {
  std::vector<IBCurvePoint> results;
  std::mutex mu;
  std::condition_variable ready;
  std::deque<IBCurvePoint> inbox;
  std::atomic<std::size_t> next{0};
  const std::size_t threads = std::max<std::size_t>(1, std::min(workers, cells.size()));

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      IBCurvePoint p;
      try {
        p = run(cells[i]);
      } catch (const std::exception& e) {
        p = IBCurvePoint{};
        p.status = std::string("failed: ") + e.what();
      }
      p.beta = cells[i].beta;
      p.seed = cells[i].seed;
      {
        std::lock_guard<std::mutex> lock(mu);
        inbox.push_back(std::move(p));
      }
      ready.notify_one();
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);

  // This thread is the only writer of `results`.
  while (results.size() < cells.size()) {
    std::unique_lock<std::mutex> lock(mu);
    ready.wait(lock, [&] { return !inbox.empty(); });
    IBCurvePoint p = std::move(inbox.front());
    inbox.pop_front();
    lock.unlock();
    if (on_result) on_result(p);
    results.push_back(std::move(p));
  }
  for (auto& t : pool) t.join();
  std::sort(results.begin(), results.end(), [](const IBCurvePoint& a, const IBCurvePoint& b) {
    return a.beta != b.beta ? a.beta < b.beta : a.seed < b.seed;
  });
  return results;
}

std::vector<std::size_t> eval_subset(std::span<const std::size_t> held_out, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(held_out.begin(), held_out.end());
  Rng rng(Rng::derive(seed, 0xe7a1));
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(std::min(count, idx.size()));
  return idx;
}

IBCurvePoint measure_point(const Model& model, const LabeledDataset& data, std::span<const std::size_t> mi_indices,
                           std::span<const std::size_t> accuracy_indices, const KdeConfig& kde) {
  IBCurvePoint p;
  const Tensor z = model.forward_bottleneck(data.features.gather_rows(mi_indices)).first;
  std::vector<int> labels(mi_indices.size());
  for (std::size_t i = 0; i < mi_indices.size(); ++i) labels[i] = data.labels[mi_indices[i]];
  p.mi_xz_bits = kde_mi_xz(z, kde).value_bits;
  p.mi_zy_bits = kde_mi_zy(z, labels, kde).value_bits;
  p.clean_accuracy = evaluate(model, data, accuracy_indices);
  return p;
}

std::string sweep_model_id(const ObjectiveKind& objective, double beta, std::uint64_t seed) {
  return objective_name(objective) + "-b" + format_double(beta) + "-s" + std::to_string(seed);
}

std::vector<IBCurvePoint> sweep(const LabeledDataset& train_data, const SplitIndices& split,
                                const LabeledDataset& eval_data, std::span<const std::size_t> held_out,
                                const SweepConfig& config, const CellTrainer& trainer,
                                const std::function<void(const IBCurvePoint&)>& on_result) {
  std::vector<std::string> errors;
  config.collect_errors(errors);
  if (!errors.empty()) fail(ErrorKind::kConfig, errors.front());
  const auto mi_idx = eval_subset(held_out, config.eval_samples, config.eval_seed);
  std::vector<SweepCell> cells;
  for (double beta : config.betas)
    for (std::uint64_t seed : config.seeds) cells.push_back({beta, seed});
  auto run = [&](const SweepCell& cell) {
    TrainConfig tc = config.train;
    tc.seed = cell.seed;
    const ObjectiveKind objective = with_beta(config.objective, cell.beta);
    TrainedModel tm = trainer ? trainer(cell, objective, tc) : train(train_data, split, config.spec, objective, tc);
    IBCurvePoint p = measure_point(tm.model, eval_data, mi_idx, held_out, config.kde);
    p.model_id = sweep_model_id(objective, cell.beta, cell.seed);
    return p;
  };
  return run_cells(cells, run, config.workers, on_result);
}

std::vector<CurvePoint> AggregatedCurve::curve() const {
  std::vector<CurvePoint> out;
  for (const auto& m : means) out.push_back({m.beta, m.mi_xz_bits, m.mi_zy_bits});
  return out;
}

AggregatedCurve curve_aggregate(std::span<const IBCurvePoint> points) {
  std::map<double, std::vector<const IBCurvePoint*>> by_beta;
  for (const auto& p : points) {
    if (p.ok()) by_beta[p.beta].push_back(&p);
  }
  if (by_beta.size() < 2) fail(ErrorKind::kData, "aggregation needs at least two distinct beta values");
  AggregatedCurve out;
  for (const auto& [beta, group] : by_beta) {
    BetaMean m;
    m.beta = beta;
    m.seeds = group.size();
    for (const auto* p : group) {
      m.mi_xz_bits += p->mi_xz_bits;
      m.mi_zy_bits += p->mi_zy_bits;
      m.clean_accuracy += p->clean_accuracy;
    }
    const double n = static_cast<double>(group.size());
    m.mi_xz_bits /= n;
    m.mi_zy_bits /= n;
    m.clean_accuracy /= n;
    out.means.push_back(m);
  }
  out.envelope = out.curve();
  std::stable_sort(out.envelope.begin(), out.envelope.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.mi_xz < b.mi_xz; });
  for (std::size_t i = 1; i < out.envelope.size(); ++i) {
    out.envelope[i].mi_zy = std::max(out.envelope[i].mi_zy, out.envelope[i - 1].mi_zy);
  }
  return out;
}

CsvTable sweep_table(std::span<const IBCurvePoint> points) {
  CsvTable t;
  t.schema = "iblab.sweep";
  t.columns = {"beta", "seed", "mi_xz_bits", "mi_zy_bits", "clean_accuracy", "model_id", "status"};
  for (const auto& p : points) {
    std::string status = p.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    t.rows.push_back({format_double(p.beta), std::to_string(p.seed), format_double(p.mi_xz_bits),
                      format_double(p.mi_zy_bits), format_double(p.clean_accuracy), p.model_id, status});
  }
  return t;
}

std::vector<IBCurvePoint> sweep_points_from_table(const CsvTable& t) {
  const std::size_t c_beta = t.column("beta"), c_seed = t.column("seed"), c_xz = t.column("mi_xz_bits"),
                    c_zy = t.column("mi_zy_bits"), c_acc = t.column("clean_accuracy"), c_id = t.column("model_id"),
                    c_status = t.column("status");
  std::vector<IBCurvePoint> out;
  for (const auto& row : t.rows) {
    IBCurvePoint p;
    p.beta = parse_double(row[c_beta]);
    p.seed = std::stoull(row[c_seed]);
    p.mi_xz_bits = parse_double(row[c_xz]);
    p.mi_zy_bits = parse_double(row[c_zy]);
    p.clean_accuracy = parse_double(row[c_acc]);
    p.model_id = row[c_id];
    p.status = row[c_status];
    out.push_back(p);
  }
  return out;
}

}  // namespace iblab
