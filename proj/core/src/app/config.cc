#include "iblab/app/config.h"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "iblab/error.h"
#include "iblab/hashing.h"

namespace iblab {

namespace {

using nlohmann::json;

// Typed access to one JSON object; every problem is appended to `errors`.
class Section {
 public:
  Section(const json& j, std::string where, std::vector<std::string>& errors, std::set<std::string> allowed)
      : j_(j), where_(std::move(where)), errors_(errors) {
    if (!j_.is_object()) {
      errors_.push_back(where_ + ": expected an object");
      return;
    }
    for (const auto& [key, value] : j_.items()) {
      if (!allowed.count(key)) errors_.push_back(where_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  const json& at(const char* key) const { return j_.at(key); }

  std::string path(const char* key) const { return where_ + "." + key; }

  template <class T>
  void get(const char* key, T& out) const {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      errors_.push_back(path(key) + ": wrong type");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string>& errors_;
};

const json& child(const json& j, const char* key) {
  static const json empty = json::object();
  return j.is_object() && j.contains(key) ? j.at(key) : empty;
}

KdeConfig parse_kde(const json& j, std::vector<std::string>& errors) {
  KdeConfig k;
  Section s(j, "kde", errors, {"bandwidth", "scale", "sigma", "sigma_floor"});
  std::string mode = "scaled";
  s.get("bandwidth", mode);
  if (mode == "scaled") {
    k.mode = BandwidthMode::kScaledByMedian;
  } else if (mode == "fixed") {
    k.mode = BandwidthMode::kFixed;
  } else {
    errors.push_back("kde.bandwidth: expected 'scaled' or 'fixed'");
  }
  s.get("scale", k.scale);
  s.get("sigma", k.sigma);
  s.get("sigma_floor", k.sigma_floor);
  if (!(k.scale > 0.0)) errors.push_back("kde.scale must be positive");
  if (!(k.sigma > 0.0)) errors.push_back("kde.sigma must be positive");
  if (!(k.sigma_floor > 0.0)) errors.push_back("kde.sigma_floor must be positive");
  return k;
}

json kde_to_json(const KdeConfig& k) {
  return {{"bandwidth", k.mode == BandwidthMode::kFixed ? "fixed" : "scaled"},
          {"scale", k.scale},
          {"sigma", k.sigma},
          {"sigma_floor", k.sigma_floor}};
}

std::size_t dataset_input_dim(DatasetKind kind) { return kind == DatasetKind::kSynthetic ? 12 : 784; }
std::size_t dataset_classes(DatasetKind kind) { return kind == DatasetKind::kSynthetic ? 2 : 10; }

}  // namespace

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kMnist: return "mnist";
    case DatasetKind::kFashionMnist: return "fashion-mnist";
    case DatasetKind::kSynthetic: return "synthetic";
  }
  return "?";
}

void merge_json(json& target, const json& patch) {
  if (!patch.is_object() || !target.is_object()) {
    target = patch;
    return;
  }
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && target.contains(key) && target[key].is_object()) {
      merge_json(target[key], value);
    } else {
      target[key] = value;
    }
  }
}

ExperimentConfig parse_config(const json& j) {
  std::vector<std::string> errors;
  ExperimentConfig c;
  Section top(j, "config", errors,
              {"dataset", "model", "objective", "train", "sweep", "attack", "ba", "mi", "kde", "output_dir", "seed",
               "checkpoints", "sweep_csv"});

  {
    Section s(child(j, "dataset"), "dataset", errors,
              {"name", "dir", "train_limit", "target_mi_bits", "target_balance", "label_seed"});
    std::string name = "mnist";
    s.get("name", name);
    if (name == "mnist") {
      c.dataset.kind = DatasetKind::kMnist;
    } else if (name == "fashion-mnist") {
      c.dataset.kind = DatasetKind::kFashionMnist;
    } else if (name == "synthetic") {
      c.dataset.kind = DatasetKind::kSynthetic;
    } else {
      errors.push_back("dataset.name: unknown dataset '" + name + "' (mnist, fashion-mnist, synthetic)");
    }
    std::string dir;
    s.get("dir", dir);
    c.dataset.dir = dir;
    s.get("train_limit", c.dataset.train_limit);
    s.get("target_mi_bits", c.dataset.target_mi_bits);
    s.get("target_balance", c.dataset.target_balance);
    s.get("label_seed", c.dataset.label_seed);
    if (!(c.dataset.target_mi_bits > 0.0 && c.dataset.target_mi_bits <= 1.0)) {
      errors.push_back("dataset.target_mi_bits must lie in (0, 1]");
    }
    if (!(c.dataset.target_balance > 0.0 && c.dataset.target_balance < 1.0)) {
      errors.push_back("dataset.target_balance must lie in (0, 1)");
    }
  }

  top.get("seed", c.seed);
  std::string output_dir = "runs";
  top.get("output_dir", output_dir);
  c.output_dir = output_dir;
  std::vector<std::string> checkpoints;
  top.get("checkpoints", checkpoints);
  c.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  std::string sweep_csv;
  top.get("sweep_csv", sweep_csv);
  c.sweep_csv = sweep_csv;

  c.model = c.dataset.kind == DatasetKind::kSynthetic ? ModelSpec::synthetic() : ModelSpec::mnist();
  {
    Section s(child(j, "model"), "model", errors, {"widths", "bottleneck"});
    s.get("widths", c.model.widths);
    s.get("bottleneck", c.model.bottleneck);
    try {
      c.model.validate(dataset_input_dim(c.dataset.kind), dataset_classes(c.dataset.kind));
    } catch (const Error& e) {
      errors.push_back(std::string("model: ") + e.what());
    }
  }

  if (top.has("objective")) {
    json objective = j.at("objective");
    if (objective.is_object() && !objective.contains("kind")) objective["kind"] = objective_name(c.objective);
    c.objective = objective_from_json(objective, errors);
  }
  collect_objective_errors(c.objective, dataset_input_dim(c.dataset.kind), errors);

  // Desk-scale default; the early-stopping patience keeps its full value.
  c.train.max_epochs = 20;
  {
    Section s(child(j, "train"), "train", errors, {"learning_rate", "batch", "patience", "max_epochs"});
    s.get("learning_rate", c.train.learning_rate);
    s.get("batch", c.train.batch);
    s.get("patience", c.train.patience);
    s.get("max_epochs", c.train.max_epochs);
    c.train.seed = c.seed;
    c.train.collect_errors(errors);
  }

  c.mi.kde = parse_kde(child(j, "kde"), errors);

  {
    Section s(child(j, "sweep"), "sweep", errors, {"betas", "beta_grid", "seeds", "eval_samples", "eval_seed", "workers"});
    if (s.has("betas") && s.has("beta_grid")) errors.push_back("sweep: give either betas or beta_grid, not both");
    s.get("betas", c.sweep.betas);
    if (s.has("beta_grid")) {
      Section g(s.at("beta_grid"), "sweep.beta_grid", errors, {"lo", "hi", "points"});
      double lo = 2e-4, hi = 2.0;
      std::size_t points = 16;
      g.get("lo", lo);
      g.get("hi", hi);
      g.get("points", points);
      try {
        c.sweep.betas = geometric_grid(lo, hi, points);
      } catch (const Error& e) {
        errors.push_back(std::string("sweep.beta_grid: ") + e.what());
      }
    }
    s.get("seeds", c.sweep.seeds);
    s.get("eval_samples", c.sweep.eval_samples);
    s.get("eval_seed", c.sweep.eval_seed);
    s.get("workers", c.sweep.workers);
    c.sweep.objective = c.objective;
    c.sweep.spec = c.model;
    c.sweep.train = c.train;
    c.sweep.kde = c.mi.kde;
    c.sweep.collect_errors(errors);
  }

  c.attack.deepfool_samples = 1000;
  {
    Section s(child(j, "attack"), "attack", errors,
              {"fgs_eps", "tgs_eps", "deepfool_max_iter", "deepfool_overshoot", "run_deepfool", "deepfool_samples",
               "batch"});
    s.get("fgs_eps", c.attack.fgs_eps);
    s.get("tgs_eps", c.attack.tgs_eps);
    s.get("deepfool_max_iter", c.attack.deepfool.max_iter);
    s.get("deepfool_overshoot", c.attack.deepfool.overshoot);
    s.get("run_deepfool", c.attack.run_deepfool);
    s.get("deepfool_samples", c.attack.deepfool_samples);
    s.get("batch", c.attack.batch);
    c.attack.collect_errors(errors);
  }

  {
    Section s(child(j, "ba"), "ba", errors,
              {"cardinality", "beta_lo", "beta_hi", "points", "tol", "max_iter", "cold_start"});
    s.get("cardinality", c.ba.cardinality);
    s.get("beta_lo", c.ba.beta_lo);
    s.get("beta_hi", c.ba.beta_hi);
    s.get("points", c.ba.points);
    s.get("tol", c.ba.tol);
    s.get("max_iter", c.ba.max_iter);
    s.get("cold_start", c.ba.cold_start);
    if (c.ba.cardinality < 2) errors.push_back("ba.cardinality must be >= 2");
    if (!(c.ba.beta_lo > 0.0 && c.ba.beta_hi > c.ba.beta_lo)) errors.push_back("ba: need 0 < beta_lo < beta_hi");
    if (c.ba.points < 2) errors.push_back("ba.points must be >= 2");
    if (!(c.ba.tol > 0.0)) errors.push_back("ba.tol must be positive");
    if (c.ba.max_iter < 1) errors.push_back("ba.max_iter must be >= 1");
  }

  {
    Section s(child(j, "mi"), "mi", errors, {"samples", "bins", "dv", "dv_steps", "dv_batch", "dv_learning_rate"});
    s.get("samples", c.mi.samples);
    s.get("bins", c.mi.bins);
    s.get("dv", c.mi.dv);
    s.get("dv_steps", c.mi.dv_train.steps);
    s.get("dv_batch", c.mi.dv_train.batch);
    s.get("dv_learning_rate", c.mi.dv_train.learning_rate);
    c.mi.dv_train.seed = c.seed;
    if (c.mi.samples < 2) errors.push_back("mi.samples must be >= 2");
    if (c.mi.bins < 2) errors.push_back("mi.bins must be >= 2");
    if (c.mi.dv_train.steps < 1) errors.push_back("mi.dv_steps must be >= 1");
    if (c.mi.dv_train.batch < 2) errors.push_back("mi.dv_batch must be >= 2");
    if (!(c.mi.dv_train.learning_rate > 0.0)) errors.push_back("mi.dv_learning_rate must be positive");
  }

  if (!errors.empty()) {
    std::ostringstream msg;
    msg << errors.size() << " configuration error" << (errors.size() == 1 ? "" : "s") << ":";
    for (const auto& e : errors) msg << "\n  - " << e;
    fail(ErrorKind::kConfig, msg.str());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const json& overrides) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::kIo, "cannot open config file " + path.string());
    try {
      in >> j;
    } catch (const json::exception& e) {
      fail(ErrorKind::kConfig, "config file " + path.string() + " is not valid JSON: " + e.what());
    }
  }
  if (!overrides.is_null()) merge_json(j, overrides);
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  std::vector<std::string> checkpoints;
  for (const auto& p : c.checkpoints) checkpoints.push_back(p.string());
  return {{"dataset",
           {{"name", to_string(c.dataset.kind)},
            {"dir", c.dataset.dir.string()},
            {"train_limit", c.dataset.train_limit},
            {"target_mi_bits", c.dataset.target_mi_bits},
            {"target_balance", c.dataset.target_balance},
            {"label_seed", c.dataset.label_seed}}},
          {"model", model_spec_to_json(c.model)},
          {"objective", objective_to_json(c.objective)},
          {"train",
           {{"learning_rate", c.train.learning_rate},
            {"batch", c.train.batch},
            {"patience", c.train.patience},
            {"max_epochs", c.train.max_epochs}}},
          {"kde", kde_to_json(c.mi.kde)},
          {"sweep",
           {{"betas", c.sweep.betas},
            {"seeds", c.sweep.seeds},
            {"eval_samples", c.sweep.eval_samples},
            {"eval_seed", c.sweep.eval_seed},
            {"workers", c.sweep.workers}}},
          {"attack", attack_config_to_json(c.attack)},
          {"ba",
           {{"cardinality", c.ba.cardinality},
            {"beta_lo", c.ba.beta_lo},
            {"beta_hi", c.ba.beta_hi},
            {"points", c.ba.points},
            {"tol", c.ba.tol},
            {"max_iter", c.ba.max_iter},
            {"cold_start", c.ba.cold_start}}},
          {"mi",
           {{"samples", c.mi.samples},
            {"bins", c.mi.bins},
            {"dv", c.mi.dv},
            {"dv_steps", c.mi.dv_train.steps},
            {"dv_batch", c.mi.dv_train.batch},
            {"dv_learning_rate", c.mi.dv_train.learning_rate}}},
          {"output_dir", c.output_dir.string()},
          {"seed", c.seed},
          {"checkpoints", checkpoints},
          {"sweep_csv", c.sweep_csv.string()}};
}

std::string config_digest(const ExperimentConfig& config, std::string_view subcommand) {
  static const std::map<std::string_view, std::vector<std::string>> kSections = {
      {"ba-curve", {"dataset", "ba", "seed"}},
      {"train", {"dataset", "model", "objective", "train", "seed"}},
      {"sweep", {"dataset", "model", "objective", "train", "kde", "sweep", "ba", "seed"}},
      {"knee", {"dataset", "model", "objective", "train", "kde", "sweep", "mi", "seed", "sweep_csv"}},
      {"attack", {"dataset", "attack", "seed", "checkpoints"}},
      {"mi-eval", {"dataset", "kde", "mi", "sweep", "seed", "checkpoints"}},
  };
  const json full = config_to_json(config);
  json j = json::object();
  const auto it = kSections.find(subcommand);
  if (it == kSections.end()) {
    j = full;
    j.erase("output_dir");
  } else {
    for (const auto& key : it->second) j[key] = full.at(key);
  }
  // Results do not depend on the degree of parallelism.
  if (j.contains("sweep")) j["sweep"].erase("workers");
  std::string text(kCodeVersion);
  text += '\n';
  text += subcommand;
  text += '\n';
  text += j.dump();
  return sha256_hex(text);
}

}  // namespace iblab
