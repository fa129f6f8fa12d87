#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace iblab {

/// Provenance of one subcommand execution. Artifact paths are relative to
/// the run directory. Once finalized the record rejects further changes.
class RunRecord {
 public:
  RunRecord() = default;
  RunRecord(std::string subcommand, std::string config_digest, std::string input_hash);

  const std::string& subcommand() const { return subcommand_; }
  const std::string& config_digest() const { return config_digest_; }
  const std::string& input_hash() const { return input_hash_; }
  const std::string& started() const { return started_; }
  const std::string& finished() const { return finished_; }
  const std::string& status() const { return status_; }
  const std::vector<std::string>& artifacts() const { return artifacts_; }
  const nlohmann::json& summary() const { return summary_; }
  bool finalized() const { return finalized_; }
  bool ok() const { return finalized_ && status_ == "ok"; }

  void add_artifact(const std::string& relative_path);
  void set_summary(const std::string& key, nlohmann::json value);
  // status is "ok" or "failed: <cause>".
  void finalize(const std::string& status);

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);

 private:
  void check_mutable() const;

  std::string subcommand_;
  std::string config_digest_;
  std::string input_hash_;
  std::string started_;
  std::string finished_;
  std::string status_ = "running";
  std::vector<std::string> artifacts_;
  nlohmann::json summary_ = nlohmann::json::object();
  bool finalized_ = false;
};

// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

/// Git-style content hash over the inputs: the config digest followed by the
/// blob hash of every file, in the given order.
std::string inputs_hash(const std::string& config_digest, std::span<const std::filesystem::path> files);

// <store>/<subcommand>-<first 16 digest digits>
std::filesystem::path run_directory(const std::filesystem::path& store, const std::string& subcommand,
                                    const std::string& digest);

inline constexpr const char* kRunRecordFile = "run.json";

void save_run_record(const std::filesystem::path& dir, const RunRecord& record);
// nullopt when the directory holds no record.
std::optional<RunRecord> load_run_record(const std::filesystem::path& dir);

}  // namespace iblab
