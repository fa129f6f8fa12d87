#include "iblab/app/run_record.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include "iblab/checkpoint.h"
#include "iblab/error.h"
#include "iblab/hashing.h"

namespace iblab {

RunRecord::RunRecord(std::string subcommand, std::string config_digest, std::string input_hash)
    : subcommand_(std::move(subcommand)),
      config_digest_(std::move(config_digest)),
      input_hash_(std::move(input_hash)),
      started_(utc_timestamp()) {}

void RunRecord::check_mutable() const {
  if (finalized_) fail(ErrorKind::kUsage, "run record is finalized");
}

void RunRecord::add_artifact(const std::string& relative_path) {
  check_mutable();
  if (std::find(artifacts_.begin(), artifacts_.end(), relative_path) == artifacts_.end()) {
    artifacts_.push_back(relative_path);
  }
}

void RunRecord::set_summary(const std::string& key, nlohmann::json value) {
  check_mutable();
  summary_[key] = std::move(value);
}

void RunRecord::finalize(const std::string& status) {
  check_mutable();
  status_ = status;
  finished_ = utc_timestamp();
  finalized_ = true;
}

nlohmann::json RunRecord::to_json() const {
  return {{"subcommand", subcommand_}, {"config_digest", config_digest_}, {"input_hash", input_hash_},
          {"started", started_},       {"finished", finished_},           {"status", status_},
          {"artifacts", artifacts_},   {"summary", summary_},             {"finalized", finalized_}};
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
  RunRecord r;
  try {
    r.subcommand_ = j.at("subcommand").get<std::string>();
    r.config_digest_ = j.at("config_digest").get<std::string>();
    r.input_hash_ = j.at("input_hash").get<std::string>();
    r.started_ = j.at("started").get<std::string>();
    r.finished_ = j.at("finished").get<std::string>();
    r.status_ = j.at("status").get<std::string>();
    r.artifacts_ = j.at("artifacts").get<std::vector<std::string>>();
    r.summary_ = j.at("summary");
    r.finalized_ = j.at("finalized").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kIo, std::string("malformed run record: ") + e.what());
  }
  return r;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string inputs_hash(const std::string& config_digest, std::span<const std::filesystem::path> files) {
  std::string text = config_digest + "\n";
  for (const auto& f : files) text += content_hash_file(f) + "\n";
  return sha256_hex(text);
}

std::filesystem::path run_directory(const std::filesystem::path& store, const std::string& subcommand,
                                    const std::string& digest) {
  return store / (subcommand + "-" + digest.substr(0, 16));
}

void save_run_record(const std::filesystem::path& dir, const RunRecord& record) {
  write_text_atomic(dir / kRunRecordFile, record.to_json().dump(2) + "\n");
}

std::optional<RunRecord> load_run_record(const std::filesystem::path& dir) {
  const auto path = dir / kRunRecordFile;
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kIo, "run record " + path.string() + " is not valid JSON: " + e.what());
  }
  return RunRecord::from_json(j);
}

}  // namespace iblab
