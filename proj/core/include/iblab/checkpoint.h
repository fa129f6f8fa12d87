#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "iblab/params.h"
#include "iblab/tensor.h"

namespace iblab {

/// Self-describing parameter container.
///
/// Byte layout (all integers little-endian):
///
///   offset  size  field
///   0       8     magic "IBLCKPT1"
///   8       4     u32 format version (currently 1)
///   12      8     u64 header length H
///   20      H     UTF-8 JSON header with sorted keys:
///                   {"format": "iblab-checkpoint",
///                    "metadata": {...caller supplied: widths, objective...},
///                    "seed": <u64>,
///                    "tensors": [{"name", "shape", "offset", "count"}, ...]}
///                 `offset` counts f64 elements from the start of the payload.
///   20+H    8*N   payload: IEEE-754 binary64 values, little-endian, tensors
///                 concatenated in header order, row-major
///   end-32  32    SHA-256 of every preceding byte
///
/// Encoding is a pure function of the contents, so equal models produce
/// byte-identical files on every platform.
struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, Tensor>> tensors;

  // Appends every parameter of `store`, each name prefixed with `prefix`.
  void add_store(const ParamStore& store, const std::string& prefix = "");
  // Overwrites every parameter of `store` from the entries named
  // `prefix + name`. Missing entries or shape mismatches are integrity errors.
  void restore_store(ParamStore& store, const std::string& prefix = "") const;
  const Tensor& tensor(const std::string& name) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
// Integrity errors (ErrorKind::kIo) on truncation, bad magic, unknown
// version or checksum mismatch. Nothing is returned on failure.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace iblab
