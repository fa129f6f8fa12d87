#include "iblab/attacks/robust_eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "iblab/error.h"
#include "iblab/ops.h"

namespace iblab {

namespace {

std::string cell(double v) { return std::isnan(v) ? "" : format_double(v); }

double parse_cell(const std::string& s) { return s.empty() ? NAN : parse_double(s); }

std::size_t count_correct(const Classifier& clf, const Tensor& x, std::span<const int> labels) {
  const auto predicted = ops::argmax_rows(clf.logits(x));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predicted[i] == labels[i];
  return correct;
}

std::string mean_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f+-%.3f", mean, std);
  return buf;
}

}  // namespace

void AttackConfig::collect_errors(std::vector<std::string>& errors) const {
  for (double e : fgs_eps)
    if (!(e >= 0.0)) errors.push_back("attack.fgs_eps entries must be >= 0");
  for (double e : tgs_eps)
    if (!(e >= 0.0)) errors.push_back("attack.tgs_eps entries must be >= 0");
  if (deepfool.max_iter < 1) errors.push_back("attack.deepfool_max_iter must be >= 1");
  if (!(deepfool.overshoot >= 0.0)) errors.push_back("attack.deepfool_overshoot must be >= 0");
  if (batch == 0) errors.push_back("attack.batch must be positive");
}

nlohmann::json attack_config_to_json(const AttackConfig& config) {
  return {{"fgs_eps", config.fgs_eps},
          {"tgs_eps", config.tgs_eps},
          {"deepfool_max_iter", config.deepfool.max_iter},
          {"deepfool_overshoot", config.deepfool.overshoot},
          {"run_deepfool", config.run_deepfool},
          {"deepfool_samples", config.deepfool_samples},
          {"batch", config.batch}};
}

AttackReport robust_eval(std::span<const AttackedModel> models, const LabeledDataset& data,
                         std::span<const std::size_t> test_indices, const AttackConfig& config) {
  std::vector<std::string> errors;
  config.collect_errors(errors);
  if (!errors.empty()) fail(ErrorKind::kConfig, errors.front());
  if (test_indices.empty()) fail(ErrorKind::kData, "attack evaluation on an empty index set");
  AttackReport report;
  const std::size_t n = test_indices.size();
  for (const auto& m : models) {
    if (!m.model) fail(ErrorKind::kUsage, "attacked model is null");
    ModelClassifier clf(*m.model);
    auto row = [&](const std::string& attack, double eps) {
      AttackRow r{m.model_id, m.objective, m.beta, m.seed, attack, eps, NAN, NAN, NAN, 0, 0};
      return r;
    };
    std::size_t clean = 0;
    std::vector<std::size_t> fgs_ok(config.fgs_eps.size(), 0), tgs_ok(config.tgs_eps.size(), 0);
    for (std::size_t start = 0; start < n; start += config.batch) {
      const auto chunk = test_indices.subspan(start, std::min(config.batch, n - start));
      const Batch b = make_batch(data, chunk);
      clean += count_correct(clf, b.features, b.labels);
      if (!config.fgs_eps.empty()) {
        const Tensor grad = loss_input_gradient(clf, b.features, b.labels);
        for (std::size_t e = 0; e < config.fgs_eps.size(); ++e) {
          fgs_ok[e] += count_correct(clf, sign_step(b.features, grad, config.fgs_eps[e]), b.labels);
        }
      }
      if (!config.tgs_eps.empty()) {
        const auto targets = tgs_targets(b.labels, data.num_classes);
        for (std::size_t e = 0; e < config.tgs_eps.size(); ++e) {
          tgs_ok[e] += count_correct(clf, tgs(clf, b.features, targets, config.tgs_eps[e]), b.labels);
        }
      }
    }
    const double dn = static_cast<double>(n);
    AttackRow c = row("clean", 0.0);
    c.accuracy = static_cast<double>(clean) / dn;
    c.samples = n;
    report.rows.push_back(c);
    for (std::size_t e = 0; e < config.fgs_eps.size(); ++e) {
      AttackRow r = row("fgs", config.fgs_eps[e]);
      r.accuracy = static_cast<double>(fgs_ok[e]) / dn;
      r.samples = n;
      report.rows.push_back(r);
    }
    for (std::size_t e = 0; e < config.tgs_eps.size(); ++e) {
      AttackRow r = row("tgs", config.tgs_eps[e]);
      r.accuracy = static_cast<double>(tgs_ok[e]) / dn;
      r.samples = n;
      report.rows.push_back(r);
    }
    if (config.run_deepfool) {
      const std::size_t k = config.deepfool_samples ? std::min(config.deepfool_samples, n) : n;
      const Batch b = make_batch(data, test_indices.subspan(0, k));
      const DeepFoolResult df = deepfool(clf, b.features, config.deepfool);
      AttackRow r = row("deepfool", 0.0);
      r.sum_l2 = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        r.sum_l2 += df.l2[i];
        r.flagged += df.flagged[i];
      }
      r.mean_l2 = r.sum_l2 / static_cast<double>(k);
      r.samples = k;
      report.rows.push_back(r);
    }
  }
  return report;
}

std::vector<AttackSummary> AttackReport::summary() const {
  std::vector<AttackSummary> out;
  std::map<std::tuple<std::string, std::string, double>, std::vector<double>> values;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.objective, r.attack, r.eps);
    if (!values.count(key)) out.push_back({r.objective, r.attack, r.eps, 0.0, 0.0, 0});
    values[key].push_back(r.attack == "deepfool" ? r.mean_l2 : r.accuracy);
  }
  for (auto& s : out) {
    const auto& v = values[std::make_tuple(s.objective, s.attack, s.eps)];
    s.seeds = v.size();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    s.mean = mean;
    s.std = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return out;
}

CsvTable AttackReport::table() const {
  CsvTable t;
  t.schema = "iblab.attack";
  t.columns = {"model_id", "objective", "beta",    "seed",   "attack",       "eps",
               "accuracy", "mean_l2",   "sum_l2", "flagged_count", "samples"};
  for (const auto& r : rows) {
    t.rows.push_back({r.model_id, r.objective, format_double(r.beta), std::to_string(r.seed), r.attack,
                      format_double(r.eps), cell(r.accuracy), cell(r.mean_l2), cell(r.sum_l2),
                      std::to_string(r.flagged), std::to_string(r.samples)});
  }
  return t;
}

AttackReport AttackReport::from_table(const CsvTable& t) {
  AttackReport out;
  const std::size_t c_model = t.column("model_id"), c_obj = t.column("objective"), c_beta = t.column("beta"),
                    c_seed = t.column("seed"), c_attack = t.column("attack"), c_eps = t.column("eps"),
                    c_acc = t.column("accuracy"), c_mean = t.column("mean_l2"), c_sum = t.column("sum_l2"),
                    c_flag = t.column("flagged_count"), c_n = t.column("samples");
  for (const auto& row : t.rows) {
    AttackRow r;
    r.model_id = row[c_model];
    r.objective = row[c_obj];
    r.beta = parse_double(row[c_beta]);
    r.seed = std::stoull(row[c_seed]);
    r.attack = row[c_attack];
    r.eps = parse_double(row[c_eps]);
    r.accuracy = parse_cell(row[c_acc]);
    r.mean_l2 = parse_cell(row[c_mean]);
    r.sum_l2 = parse_cell(row[c_sum]);
    r.flagged = std::stoull(row[c_flag]);
    r.samples = std::stoull(row[c_n]);
    out.rows.push_back(r);
  }
  return out;
}

std::string AttackReport::accuracy_text() const {
  const auto s = summary();
  std::vector<std::pair<std::string, double>> columns;  // (attack, eps)
  std::vector<std::string> objectives;
  for (const auto& e : s) {
    if (e.attack == "deepfool") continue;
    if (std::find(objectives.begin(), objectives.end(), e.objective) == objectives.end()) {
      objectives.push_back(e.objective);
    }
    const auto key = std::make_pair(e.attack, e.eps);
    if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
  }
  if (objectives.empty()) return "no accuracy results\n";
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-10s", "method");
  out << buf;
  for (const auto& [attack, eps] : columns) {
    std::snprintf(buf, sizeof(buf), " %14s", attack == "clean" ? "clean" : (attack + " " + format_double(eps)).c_str());
    out << buf;
  }
  out << "\n";
  for (const auto& obj : objectives) {
    std::snprintf(buf, sizeof(buf), "%-10s", obj.c_str());
    out << buf;
    for (const auto& [attack, eps] : columns) {
      std::string text = "-";
      for (const auto& e : s) {
        if (e.objective == obj && e.attack == attack && e.eps == eps) text = mean_std(e.mean, e.std);
      }
      std::snprintf(buf, sizeof(buf), " %14s", text.c_str());
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

std::string AttackReport::deepfool_text() const {
  std::ostringstream out;
  char buf[96];
  bool any = false;
  for (const auto& e : summary()) {
    if (e.attack != "deepfool") continue;
    if (!any) {
      std::snprintf(buf, sizeof(buf), "%-10s %16s %6s\n", "method", "mean |delta|_2", "seeds");
      out << buf;
      any = true;
    }
    std::snprintf(buf, sizeof(buf), "%-10s %16s %6zu\n", e.objective.c_str(), mean_std(e.mean, e.std).c_str(),
                  e.seeds);
    out << buf;
  }
  return any ? out.str() : "no deepfool results\n";
}

}  // namespace iblab
