#include "iblab/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "iblab/error.h"
#include "iblab/hashing.h"

namespace iblab {

namespace {

constexpr char kMagic[8] = {'I', 'B', 'L', 'C', 'K', 'P', 'T', '1'};
constexpr std::size_t kPreamble = 8 + 4 + 8;
constexpr std::size_t kTrailer = 32;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[offset + i]) << (8 * i);
  }
  return value;
}

[[noreturn]] void integrity(const std::string& what) {
  fail(ErrorKind::kIo, "checkpoint integrity error: " + what);
}

}  // namespace

void Checkpoint::add_store(const ParamStore& store, const std::string& prefix) {
  for (const auto& e : store.entries()) tensors.emplace_back(prefix + e.name, e.value);
}

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  integrity("missing tensor '" + name + "'");
}

void Checkpoint::restore_store(ParamStore& store, const std::string& prefix) const {
  // Validate everything first so a failure leaves the store untouched.
  for (const auto& e : store.entries()) {
    const Tensor& t = tensor(prefix + e.name);
    if (!t.same_shape(e.value)) integrity("shape mismatch for '" + e.name + "'");
  }
  for (auto& e : store.entries()) e.value = tensor(prefix + e.name);
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint) {
  nlohmann::json header;
  header["format"] = "iblab-checkpoint";
  header["metadata"] = checkpoint.metadata;
  header["seed"] = checkpoint.seed;
  header["tensors"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : checkpoint.tensors) {
    header["tensors"].push_back(
        {{"name", name}, {"shape", t.shape()}, {"offset", offset}, {"count", t.size()}});
    offset += t.size();
  }
  const std::string header_text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kPreamble + header_text.size() + offset * 8 + kTrailer);
  out.insert(out.end(), kMagic, kMagic + 8);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, header_text.size());
  out.insert(out.end(), header_text.begin(), header_text.end());
  for (const auto& entry : checkpoint.tensors) {
    for (double v : entry.second.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  const Sha256Digest digest = sha256(out);
  out.insert(out.end(), digest.begin(), digest.end());
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPreamble + kTrailer) integrity("file too short (truncated?)");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) integrity("bad magic");
  const auto body = bytes.first(bytes.size() - kTrailer);
  const Sha256Digest digest = sha256(body);
  if (std::memcmp(digest.data(), bytes.data() + body.size(), kTrailer) != 0) {
    integrity("checksum mismatch (truncated or corrupted)");
  }
  const auto version = get_le<std::uint32_t>(bytes, 8);
  if (version != kCheckpointVersion) {
    fail(ErrorKind::kIo, "checkpoint format version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kCheckpointVersion) + "); no migration available");
  }
  const auto header_len = get_le<std::uint64_t>(bytes, 12);
  if (header_len > body.size() - kPreamble) integrity("header length exceeds file size");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(body.begin() + kPreamble, body.begin() + kPreamble + header_len);
  } catch (const nlohmann::json::exception& e) {
    integrity(std::string("unreadable header: ") + e.what());
  }
  const std::size_t payload = kPreamble + header_len;
  const std::size_t payload_values = (body.size() - payload) / 8;
  if ((body.size() - payload) % 8 != 0) integrity("payload is not a whole number of f64 values");

  Checkpoint out;
  try {
    out.metadata = header.at("metadata");
    out.seed = header.at("seed").get<std::uint64_t>();
    for (const auto& desc : header.at("tensors")) {
      const auto shape = desc.at("shape").get<Shape>();
      const auto offset = desc.at("offset").get<std::size_t>();
      const auto count = desc.at("count").get<std::size_t>();
      if (shape_size(shape) != count || offset + count > payload_values) {
        integrity("tensor table inconsistent with payload");
      }
      std::vector<double> values(count);
      for (std::size_t i = 0; i < count; ++i) {
        values[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, payload + 8 * (offset + i)));
      }
      out.tensors.emplace_back(desc.at("name").get<std::string>(), Tensor(shape, std::move(values)));
    }
  } catch (const nlohmann::json::exception& e) {
    integrity(std::string("malformed header: ") + e.what());
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file_atomic(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace iblab
