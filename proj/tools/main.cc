#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "iblab/app/commands.h"
#include "iblab/app/config.h"
#include "iblab/error.h"

namespace {

using nlohmann::json;

const char* describe(const std::string& name) {
  if (name == "ba-curve") return "exact IB curve of the synthetic joint via Blahut-Arimoto";
  if (name == "train") return "train one model and save its checkpoint";
  if (name == "sweep") return "train a beta x seed grid and estimate I(X;Z), I(Z;Y) per model";
  if (name == "knee") return "locate the knee of a sweep's information curve";
  if (name == "attack") return "FGS/TGS/DeepFool robustness of the given checkpoints";
  if (name == "mi-eval") return "KDE, binning and DV estimates for the given checkpoints";
  if (name == "report") return "summarize every run in the results store";
  return "";
}

struct Flags {
  std::string config;
  std::string dataset;
  std::string data_dir;
  std::string objective;
  std::string output;
  std::string sweep_csv;
  std::vector<std::string> checkpoints;
  std::vector<std::string> sets;
  double beta = -1.0;
  long long seed = -1;
  int epochs = 0;
  int workers = 0;
  bool force = false;
  bool beta_given = false;
};

// "a.b.c=<json>" -> {"a": {"b": {"c": <json>}}}. Values that do not parse
// as JSON are taken as strings.
json dotted_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    iblab::fail(iblab::ErrorKind::kUsage, "--set expects key.path=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json root = json::object();
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
  return root;
}

json overrides_from(const Flags& f) {
  json o = json::object();
  for (const auto& s : f.sets) iblab::merge_json(o, dotted_override(s));
  if (!f.dataset.empty()) o["dataset"]["name"] = f.dataset;
  if (!f.data_dir.empty()) o["dataset"]["dir"] = f.data_dir;
  if (!f.objective.empty()) o["objective"] = json{{"kind", f.objective}};
  if (f.beta_given) o["objective"]["beta"] = f.beta;
  if (f.seed >= 0) o["seed"] = f.seed;
  if (f.epochs > 0) o["train"]["max_epochs"] = f.epochs;
  if (f.workers > 0) o["sweep"]["workers"] = f.workers;
  if (!f.output.empty()) o["output_dir"] = f.output;
  if (!f.checkpoints.empty()) o["checkpoints"] = f.checkpoints;
  if (!f.sweep_csv.empty()) o["sweep_csv"] = f.sweep_csv;
  return o;
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config, "JSON config file; flags override its values");
  cmd->add_option("--dataset", f.dataset, "mnist, fashion-mnist or synthetic");
  cmd->add_option("--data-dir", f.data_dir, "IDX directory (default: $IBLAB_DATA_DIR)");
  cmd->add_option("--objective", f.objective, "normal, dropout, vib, nib or aib");
  cmd->add_option("--beta", f.beta, "compression weight (dropout: rate)");
  cmd->add_option("--seed", f.seed, "global seed");
  cmd->add_option("--epochs", f.epochs, "maximum training epochs");
  cmd->add_option("--workers", f.workers, "parallel sweep workers");
  cmd->add_option("-o,--output", f.output, "results store directory");
  cmd->add_option("--checkpoint", f.checkpoints, "model checkpoint (repeatable)");
  cmd->add_option("--sweep-csv", f.sweep_csv, "sweep results for knee");
  cmd->add_option("--set", f.sets, "override any config key: key.path=<json>");
  cmd->add_flag("-f,--force", f.force, "rerun even if a cached result exists");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information bottleneck experiments: BA reference curves, IB training, beta sweeps and attacks"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;
  for (const auto& name : iblab::subcommand_names()) {
    auto* cmd = app.add_subcommand(name, describe(name));
    add_common(cmd, flags);
    cmd->callback([&chosen, name] { chosen = name; });
  }
  auto* show = app.add_subcommand("show-config", "print the resolved configuration");
  add_common(show, flags);
  show->callback([&chosen] { chosen = "show-config"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : iblab::exit_code(iblab::ErrorKind::kUsage);
  }

  try {
    flags.beta_given = flags.beta >= 0.0 || app.get_subcommand(chosen)->count("--beta") > 0;
    const auto config = iblab::load_config(flags.config, overrides_from(flags));
    if (chosen == "show-config") {
      std::cout << iblab::config_to_json(config).dump(2) << "\n";
      return 0;
    }
    iblab::CommandOptions options;
    options.force = flags.force;
    iblab::run_subcommand(chosen, config, options);
  } catch (const iblab::Error& e) {
    std::cerr << "error (" << iblab::to_string(e.kind()) << "): " << e.what() << "\n";
    return iblab::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
