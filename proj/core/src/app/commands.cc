#include "iblab/app/commands.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "iblab/ba/blahut_arimoto.h"
#include "iblab/checkpoint.h"
#include "iblab/csv.h"
#include "iblab/data/idx.h"
#include "iblab/data/synthetic.h"
#include "iblab/error.h"
#include "iblab/info.h"
#include "iblab/mi/binning.h"
#include "iblab/mi/export.h"
#include "iblab/sweep/knee.h"
#include "iblab/sweep/pca.h"
#include "iblab/sweep/svg.h"

namespace iblab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunContext {
  const ExperimentConfig& config;
  fs::path dir;
  RunRecord& record;
  std::ostream& out;

  void csv(const std::string& rel, const CsvTable& table) {
    write_csv(dir / rel, table);
    record.add_artifact(rel);
  }
  void text(const std::string& rel, const std::string& content) {
    fs::create_directories((dir / rel).parent_path());
    write_text_atomic(dir / rel, content);
    record.add_artifact(rel);
  }
  void checkpoint(const std::string& rel, const Checkpoint& c) {
    fs::create_directories((dir / rel).parent_path());
    save_checkpoint(dir / rel, c);
    record.add_artifact(rel);
  }
  void save() { save_run_record(dir, record); }
};

LabeledDataset take_rows(const LabeledDataset& data, std::size_t n) {
  if (n == 0 || n >= data.size()) return data;
  LabeledDataset out;
  out.name = data.name;
  out.num_classes = data.num_classes;
  const auto idx = iota_indices(n);
  out.features = data.features.gather_rows(idx);
  out.labels.assign(data.labels.begin(), data.labels.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

fs::path data_dir(const DatasetConfig& config) { return config.dir.empty() ? default_data_dir() : config.dir; }

std::vector<fs::path> dataset_files(const DatasetConfig& config) {
  if (config.kind == DatasetKind::kSynthetic) return {};
  const auto train = mnist_files(data_dir(config), true);
  const auto test = mnist_files(data_dir(config), false);
  return {train.images, train.labels, test.images, test.labels};
}

std::string model_id_for(const fs::path& checkpoint) {
  const std::string stem = checkpoint.stem().string();
  if (stem == "model" && checkpoint.has_parent_path()) return checkpoint.parent_path().filename().string();
  return stem;
}

TrainedModel load_trained(const fs::path& path, const ExperimentData& data) {
  TrainedModel tm = from_checkpoint(load_checkpoint(path));
  try {
    tm.model.spec().validate(data.test.dim(), static_cast<std::size_t>(data.test.num_classes));
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
  return tm;
}

std::vector<int> labels_at(const LabeledDataset& data, std::span<const std::size_t> idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = data.labels[idx[i]];
  return out;
}

// ---------------------------------------------------------------- ba-curve

void run_ba_curve(RunContext& ctx) {
  const auto& c = ctx.config;
  if (c.dataset.kind != DatasetKind::kSynthetic) {
    fail(ErrorKind::kConfig, "ba-curve needs a dataset with an enumerable joint (dataset.name = synthetic)");
  }
  const auto data = load_experiment_data(c.dataset, c.seed);
  write_synthetic_csv(ctx.dir / "synthetic.csv", data.train);
  ctx.record.add_artifact("synthetic.csv");

  const DiscreteJoint joint{*data.train.exact_joint};
  const auto grid = geometric_grid(c.ba.beta_lo, c.ba.beta_hi, c.ba.points);
  BAConfig base;
  base.cardinality = c.ba.cardinality;
  base.tol = c.ba.tol;
  base.max_iter = c.ba.max_iter;
  base.seed = c.seed;
  const auto curve = ba_curve(joint, grid, base, c.ba.cold_start);
  ctx.csv("ba_curve.csv", ba_curve_table(curve));

  PlotSpec plot{"Optimal information curve", "I(X;Z) [bits]", "I(Z;Y) [bits]", false, {}};
  PlotSeries s{"BA", {}, "#1f77b4", true, true};
  for (const auto& p : curve) s.points.emplace_back(p.mi_xz_bits, p.mi_zy_bits);
  plot.series.push_back(s);
  ctx.text("ba_curve.svg", render_plot(plot));

  const double mi_xy = info::mutual_information_bits(joint.p_xy);
  const auto& end = curve.back();
  ctx.record.set_summary("exact_mi_xy_bits", mi_xy);
  ctx.record.set_summary("endpoint_mi_zy_bits", end.mi_zy_bits);
  ctx.record.set_summary("endpoint_fraction", end.mi_zy_bits / mi_xy);
  ctx.record.set_summary("all_converged", std::all_of(curve.begin(), curve.end(), [](const auto& p) { return p.converged; }));
  ctx.out << "exact I(X;Y) = " << mi_xy << " bits; endpoint I(Z;Y) = " << end.mi_zy_bits << " bits ("
          << 100.0 * end.mi_zy_bits / mi_xy << "%)\n";
}

// ------------------------------------------------------------------- train

void run_train(RunContext& ctx) {
  const auto& c = ctx.config;
  const auto data = load_experiment_data(c.dataset, c.seed);
  auto on_epoch = [&](const EpochRecord& e) {
    ctx.out << "epoch " << e.epoch << "  loss " << e.train_loss << "  val_acc " << e.val_acc;
    if (!std::isnan(e.dv_bound)) ctx.out << "  dv " << e.dv_bound;
    ctx.out << "\n" << std::flush;
  };
  const TrainedModel tm = train(data.train, data.split, c.model, c.objective, c.train, on_epoch);
  ctx.checkpoint("model.ckpt", to_checkpoint(tm));
  ctx.csv("train_log.csv", tm.log.table());
  const double test_acc = evaluate(tm.model, data.test, data.test_indices);
  ctx.record.set_summary("objective", objective_name(c.objective));
  ctx.record.set_summary("beta", objective_beta(c.objective));
  ctx.record.set_summary("test_accuracy", test_acc);
  ctx.record.set_summary("best_epoch", tm.log.best_epoch);
  ctx.record.set_summary("best_val_acc", tm.log.best_val_acc);
  ctx.record.set_summary("epochs", tm.log.epochs.size());
  ctx.record.set_summary("clipped_steps", tm.log.clipped_steps);
  ctx.out << "test accuracy " << test_acc << " (best epoch " << tm.log.best_epoch << ")\n";
}

// ------------------------------------------------------------------- sweep

std::vector<BACurvePoint> synthetic_reference(const ExperimentConfig& c, const ExperimentData& data) {
  if (!data.train.exact_joint) return {};
  BAConfig base;
  base.cardinality = c.ba.cardinality;
  base.tol = c.ba.tol;
  base.max_iter = c.ba.max_iter;
  base.seed = c.seed;
  const auto grid = geometric_grid(c.ba.beta_lo, c.ba.beta_hi, c.ba.points);
  return ba_curve(DiscreteJoint{*data.train.exact_joint}, grid, base, c.ba.cold_start);
}

void run_sweep(RunContext& ctx) {
  const auto& c = ctx.config;
  const auto data = load_experiment_data(c.dataset, c.seed);
  std::vector<IBCurvePoint> done;

  auto trainer = [&](const SweepCell& cell, const ObjectiveKind& objective, const TrainConfig& tc) {
    TrainedModel tm = train(data.train, data.split, c.model, objective, tc);
    const std::string rel = "models/" + sweep_model_id(objective, cell.beta, cell.seed) + ".ckpt";
    fs::create_directories((ctx.dir / rel).parent_path());
    save_checkpoint(ctx.dir / rel, to_checkpoint(tm));
    return tm;
  };
  // Runs on the collector thread only.
  auto on_result = [&](const IBCurvePoint& p) {
    done.push_back(p);
    if (p.ok()) ctx.record.add_artifact("models/" + p.model_id + ".ckpt");
    auto sorted = done;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      return a.beta != b.beta ? a.beta < b.beta : a.seed < b.seed;
    });
    ctx.csv("sweep.csv", sweep_table(sorted));
    ctx.save();
    ctx.out << "[" << done.size() << "/" << c.sweep.betas.size() * c.sweep.seeds.size() << "] beta " << p.beta
            << " seed " << p.seed << ": " << p.status;
    if (p.ok()) {
      ctx.out << "  I(X;Z) " << p.mi_xz_bits << "  I(Z;Y) " << p.mi_zy_bits << "  acc " << p.clean_accuracy;
    }
    ctx.out << "\n" << std::flush;
  };
  const std::string started = utc_timestamp();
  const auto points = sweep(data.train, data.split, data.test, data.test_indices, c.sweep, trainer, on_result);
  ctx.csv("sweep.csv", sweep_table(points));

  const std::size_t failed = std::count_if(points.begin(), points.end(), [](const auto& p) { return !p.ok(); });
  json manifest = {{"config_digest", ctx.record.config_digest()},
                   {"dataset", to_string(c.dataset.kind)},
                   {"objective", objective_name(c.objective)},
                   {"betas", c.sweep.betas},
                   {"seeds", c.sweep.seeds},
                   {"eval_samples", c.sweep.eval_samples},
                   {"eval_seed", c.sweep.eval_seed},
                   {"started", started},
                   {"finished", utc_timestamp()},
                   {"points", points.size()},
                   {"failed", failed}};
  ctx.text("manifest.json", manifest.dump(2) + "\n");
  ctx.record.set_summary("points", points.size());
  ctx.record.set_summary("failed", failed);

  std::set<double> ok_betas;
  for (const auto& p : points)
    if (p.ok()) ok_betas.insert(p.beta);
  if (ok_betas.size() >= 2) {
    const auto agg = curve_aggregate(points);
    const auto reference = synthetic_reference(c, data);
    ctx.text("information_plane.svg", information_plane_svg(points, agg, reference));
    ctx.text("mi_vs_beta.svg", mi_vs_beta_svg(agg));
    if (agg.means.size() >= 3) {
      const auto knee = knee_detect(agg.curve());
      ctx.record.set_summary("knee_beta", knee.beta);
      ctx.record.set_summary("knee_low_confidence", knee.low_confidence);
      ctx.out << "knee at beta " << knee.beta << (knee.low_confidence ? " (low confidence)" : "") << "\n";
    }
  }
  if (failed > 0) ctx.out << failed << " cell(s) failed; see sweep.csv\n";
}

// -------------------------------------------------------------------- knee

fs::path resolve_sweep_csv(const ExperimentConfig& c) {
  if (!c.sweep_csv.empty()) return c.sweep_csv;
  return run_directory(c.output_dir, "sweep", config_digest(c, "sweep")) / "sweep.csv";
}

void run_knee(RunContext& ctx, const fs::path& sweep_csv) {
  const auto& c = ctx.config;
  const auto points = sweep_points_from_table(read_csv(sweep_csv, "iblab.sweep", 1));
  const auto agg = curve_aggregate(points);
  auto curve = agg.curve();
  const auto knee = knee_detect(curve);
  std::stable_sort(curve.begin(), curve.end(), [](const auto& a, const auto& b) { return a.mi_xz < b.mi_xz; });

  CsvTable t;
  t.schema = "iblab.knee";
  t.columns = {"beta", "mi_xz_bits", "mi_zy_bits", "chord_distance", "is_knee", "low_confidence"};
  for (std::size_t i = 0; i < curve.size(); ++i) {
    t.rows.push_back({format_double(curve[i].beta), format_double(curve[i].mi_xz), format_double(curve[i].mi_zy),
                      format_double(knee.chord_distance[i]), i == knee.index ? "1" : "0",
                      knee.low_confidence ? "1" : "0"});
  }
  ctx.csv("knee.csv", t);
  ctx.record.set_summary("beta_star", knee.beta);
  ctx.record.set_summary("mi_xz_bits", knee.mi_xz);
  ctx.record.set_summary("mi_zy_bits", knee.mi_zy);
  ctx.record.set_summary("low_confidence", knee.low_confidence);
  ctx.out << "knee: beta* = " << knee.beta << "  I(X;Z) " << knee.mi_xz << "  I(Z;Y) " << knee.mi_zy
          << (knee.low_confidence ? "  (low confidence)" : "") << "\n";

  // Bottleneck scatter for the knee model and the two ends of the grid, when
  // the sweep kept its checkpoints.
  const fs::path models = sweep_csv.parent_path() / "models";
  auto first_ok = [&](double beta) -> const IBCurvePoint* {
    const IBCurvePoint* best = nullptr;
    for (const auto& p : points)
      if (p.ok() && p.beta == beta && (!best || p.seed < best->seed)) best = &p;
    return best;
  };
  const std::vector<std::pair<std::string, double>> panels = {
      {"pca_low_beta.svg", agg.means.front().beta}, {"pca_knee.svg", knee.beta}, {"pca_high_beta.svg", agg.means.back().beta}};
  std::optional<ExperimentData> data;
  for (const auto& [file, beta] : panels) {
    const IBCurvePoint* p = first_ok(beta);
    if (!p || !fs::exists(models / (p->model_id + ".ckpt"))) continue;
    if (!data) data = load_experiment_data(c.dataset, c.seed);
    const TrainedModel tm = load_trained(models / (p->model_id + ".ckpt"), *data);
    const auto idx = eval_subset(data->test_indices, std::min<std::size_t>(c.mi.samples, 1000), c.sweep.eval_seed);
    const Tensor z = tm.model.forward_bottleneck(data->test.features.gather_rows(idx)).first;
    const auto labels = labels_at(data->test, idx);
    ctx.text(file, pca_scatter_svg(pca_project_2d(z), labels, "Bottleneck PCA, beta " + format_double(beta)));
  }
}

// ------------------------------------------------------------------ attack

void run_attack(RunContext& ctx) {
  const auto& c = ctx.config;
  if (c.checkpoints.empty()) fail(ErrorKind::kConfig, "attack needs at least one checkpoint");
  const auto data = load_experiment_data(c.dataset, c.seed);
  std::vector<TrainedModel> trained;
  std::vector<std::string> ids;
  for (const auto& path : c.checkpoints) {
    trained.push_back(load_trained(path, data));
    ids.push_back(model_id_for(path));
  }
  std::vector<AttackedModel> models;
  for (std::size_t i = 0; i < trained.size(); ++i) {
    models.push_back({ids[i], objective_name(trained[i].objective), objective_beta(trained[i].objective),
                      trained[i].config.seed, &trained[i].model});
  }
  const auto report = robust_eval(models, data.test, data.test_indices, c.attack);
  ctx.csv("attack.csv", report.table());
  ctx.record.set_summary("models", ids);
  ctx.out << report.accuracy_text() << "\n" << report.deepfool_text();
}

// ----------------------------------------------------------------- mi-eval

void run_mi_eval(RunContext& ctx) {
  const auto& c = ctx.config;
  if (c.checkpoints.empty()) fail(ErrorKind::kConfig, "mi-eval needs at least one checkpoint");
  const auto data = load_experiment_data(c.dataset, c.seed);
  const auto idx = eval_subset(data.test_indices, c.mi.samples, c.sweep.eval_seed);
  const Tensor x = data.test.features.gather_rows(idx);
  const auto labels = labels_at(data.test, idx);
  std::vector<int> identity(idx.size());
  std::iota(identity.begin(), identity.end(), 0);
  const int bins = static_cast<int>(c.mi.bins);

  std::vector<MiRecord> records;
  const std::string dataset = to_string(c.dataset.kind);
  for (const auto& path : c.checkpoints) {
    const TrainedModel tm = load_trained(path, data);
    const std::string id = model_id_for(path);
    const Tensor z = tm.model.forward_bottleneck(x).first;
    records.push_back({dataset, id, "I(X;Z)", kde_mi_xz(z, c.mi.kde)});
    records.push_back({dataset, id, "I(Z;Y)", kde_mi_zy(z, labels, c.mi.kde)});
    records.push_back({dataset, id, "I(X;Z)", binning_mi(z, identity, bins)});
    records.push_back({dataset, id, "I(Z;Y)", binning_mi(z, labels, bins)});
    if (c.mi.dv) {
      StatisticNet net(x.cols(), z.cols(), {128, 64}, c.seed);
      records.push_back({dataset, id, "I(X;Z)", dv_train_estimate(x, z, net, c.mi.dv_train)});
    }
  }
  ctx.csv("mi.csv", mi_table(records));
  for (const auto& r : records) {
    ctx.out << r.model_id << "  " << r.layer << "  " << to_string(r.estimate.method) << "  " << r.estimate.value_bits
            << " bits\n";
  }
  ctx.record.set_summary("estimates", records.size());
}

// ------------------------------------------------------------------ report

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::kIo, path.string() + " is not valid JSON: " + e.what());
  }
  return j;
}

CommandOutcome run_report(const ExperimentConfig& c, std::ostream& out) {
  struct Found {
    fs::path dir;
    RunRecord record;
  };
  std::vector<Found> runs;
  if (fs::is_directory(c.output_dir)) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(c.output_dir))
      if (e.is_directory() && e.path().filename() != "report") dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      auto rec = load_run_record(d);
      if (rec && rec->ok()) runs.push_back({d, *rec});
    }
  }
  if (runs.empty()) {
    out << "no results in " << c.output_dir.string() << "\n";
    return {};
  }

  const fs::path dir = c.output_dir / "report";
  fs::remove_all(dir);
  fs::create_directories(dir);
  RunRecord record("report", config_digest(c, "report"), "");
  RunContext ctx{c, dir, record, out};
  std::ostringstream text;

  std::vector<BACurvePoint> reference;
  for (const auto& r : runs) {
    if (r.record.subcommand() != "ba-curve") continue;
    reference = ba_curve_from_table(read_csv(r.dir / "ba_curve.csv", "iblab.ba_curve", 1));
    PlotSpec plot{"Optimal information curve", "I(X;Z) [bits]", "I(Z;Y) [bits]", false, {}};
    PlotSeries s{"BA", {}, "#1f77b4", true, true};
    for (const auto& p : reference) s.points.emplace_back(p.mi_xz_bits, p.mi_zy_bits);
    plot.series.push_back(s);
    ctx.text(r.dir.filename().string() + "_ba_curve.svg", render_plot(plot));
    text << "BA curve " << r.dir.filename().string() << ": endpoint I(Z;Y) "
         << r.record.summary().value("endpoint_mi_zy_bits", 0.0) << " bits of "
         << r.record.summary().value("exact_mi_xy_bits", 0.0) << "\n";
  }

  AttackReport attacks;
  for (const auto& r : runs) {
    const std::string name = r.dir.filename().string();
    const std::string& sub = r.record.subcommand();
    if (sub == "train") {
      text << "train " << name << ": " << r.record.summary().value("objective", std::string("?")) << " beta "
           << r.record.summary().value("beta", 0.0) << " test accuracy "
           << r.record.summary().value("test_accuracy", 0.0) << "\n";
    } else if (sub == "sweep") {
      const auto points = sweep_points_from_table(read_csv(r.dir / "sweep.csv", "iblab.sweep", 1));
      std::set<double> betas;
      for (const auto& p : points)
        if (p.ok()) betas.insert(p.beta);
      if (betas.size() < 2) continue;
      const auto agg = curve_aggregate(points);
      const json cfg = read_json_file(r.dir / "config.json");
      const bool synthetic = cfg.contains("dataset") && cfg["dataset"].value("name", "") == "synthetic";
      const std::span<const BACurvePoint> overlay = synthetic ? std::span<const BACurvePoint>(reference)
                                                              : std::span<const BACurvePoint>();
      ctx.text(name + "_information_plane.svg", information_plane_svg(points, agg, overlay));
      ctx.text(name + "_mi_vs_beta.svg", mi_vs_beta_svg(agg));
      text << "sweep " << name << ": " << points.size() << " points";
      if (agg.means.size() >= 3) text << ", knee at beta " << knee_detect(agg.curve()).beta;
      text << "\n";
    } else if (sub == "knee") {
      text << "knee " << name << ": beta* " << r.record.summary().value("beta_star", 0.0) << "\n";
    } else if (sub == "attack") {
      const auto report = AttackReport::from_table(read_csv(r.dir / "attack.csv", "iblab.attack", 1));
      attacks.rows.insert(attacks.rows.end(), report.rows.begin(), report.rows.end());
    } else if (sub == "mi-eval") {
      const auto t = read_csv(r.dir / "mi.csv", "iblab.mi", 1);
      const std::size_t c_id = t.column("model_id"), c_layer = t.column("layer"), c_method = t.column("method"),
                        c_value = t.column("value_bits");
      for (const auto& row : t.rows) {
        text << "mi " << name << ": " << row[c_id] << " " << row[c_layer] << " " << row[c_method] << " "
             << row[c_value] << " bits\n";
      }
    }
  }
  if (!attacks.rows.empty()) {
    text << "\n" << attacks.accuracy_text() << "\n" << attacks.deepfool_text();
    ctx.csv("attack_summary.csv", attacks.table());
  }
  ctx.text("report.txt", text.str());
  out << text.str();
  record.set_summary("runs", runs.size());
  record.finalize("ok");
  save_run_record(dir, record);
  return {dir, record, false};
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {"ba-curve", "train", "sweep", "knee", "attack", "mi-eval", "report"};
  return names;
}

ExperimentData load_experiment_data(const DatasetConfig& config, std::uint64_t seed) {
  ExperimentData d;
  if (config.kind == DatasetKind::kSynthetic) {
    const SyntheticSpec spec = calibrate_synthetic(config.target_mi_bits, config.target_balance, config.label_seed);
    d.train = gen_synthetic(spec);
    const double ratio[] = {4.0, 1.0, 1.0};
    d.split = split(d.train.size(), ratio, seed);
    d.test = d.train;
    d.test_indices = d.split.parts.at(2);
    return d;
  }
  const std::string name = to_string(config.kind);
  const auto train_files = mnist_files(data_dir(config), true);
  const auto test_files = mnist_files(data_dir(config), false);
  d.train = take_rows(load_idx(train_files.images, train_files.labels, name, 10), config.train_limit);
  d.test = load_idx(test_files.images, test_files.labels, name, 10);
  const double ratio[] = {4.0, 1.0};
  d.split = split(d.train.size(), ratio, seed);
  d.test_indices = iota_indices(d.test.size());
  d.files = {train_files.images, train_files.labels, test_files.images, test_files.labels};
  return d;
}

CommandOutcome run_subcommand(const std::string& name, const ExperimentConfig& config, const CommandOptions& options) {
  std::ostream& out = options.out ? *options.out : std::cout;
  const auto& names = subcommand_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    fail(ErrorKind::kUsage, "unknown subcommand '" + name + "'");
  }
  if (name == "report") return run_report(config, out);

  std::vector<fs::path> inputs = dataset_files(config.dataset);
  fs::path sweep_csv;
  if (name == "knee") {
    sweep_csv = resolve_sweep_csv(config);
    if (!fs::exists(sweep_csv)) {
      fail(ErrorKind::kConfig, "no sweep results at " + sweep_csv.string() + "; run sweep first or pass a sweep CSV");
    }
    inputs = {sweep_csv};
  }
  if (name == "attack" || name == "mi-eval") {
    for (const auto& p : config.checkpoints) {
      if (!fs::exists(p)) fail(ErrorKind::kIo, "checkpoint not found: " + p.string());
      inputs.push_back(p);
    }
  }
  for (const auto& p : inputs) {
    if (!fs::exists(p)) fail(ErrorKind::kData, "input file not found: " + p.string());
  }

  const std::string digest = config_digest(config, name);
  const std::string input_hash = inputs_hash(digest, inputs);
  const fs::path dir = run_directory(config.output_dir, name, digest);
  if (auto previous = load_run_record(dir)) {
    if (previous->ok() && previous->input_hash() == input_hash && !options.force) {
      out << name << ": cached result in " << dir.string() << " (use --force to rerun)\n";
      return {dir, *previous, true};
    }
  }
  fs::remove_all(dir);
  fs::create_directories(dir);

  RunRecord record(name, digest, input_hash);
  RunContext ctx{config, dir, record, out};
  ctx.text("config.json", config_to_json(config).dump(2) + "\n");
  ctx.save();
  try {
    if (name == "ba-curve") run_ba_curve(ctx);
    else if (name == "train") run_train(ctx);
    else if (name == "sweep") run_sweep(ctx);
    else if (name == "knee") run_knee(ctx, sweep_csv);
    else if (name == "attack") run_attack(ctx);
    else if (name == "mi-eval") run_mi_eval(ctx);
  } catch (const std::exception& e) {
    record.finalize(std::string("failed: ") + e.what());
    ctx.save();
    throw;
  }
  record.finalize("ok");
  ctx.save();
  out << name << ": results in " << dir.string() << "\n";
  return {dir, record, false};
}

}  // namespace iblab
