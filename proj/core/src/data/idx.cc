#include "iblab/data/idx.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "iblab/checkpoint.h"
#include "iblab/error.h"

namespace iblab {

namespace {

[[noreturn]] void ingest_error(const std::filesystem::path& file, std::size_t offset,
                               const std::string& what) {
  fail(ErrorKind::kData, file.string() + " @ byte " + std::to_string(offset) + ": " + what);
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::filesystem::path& file) {
  if (offset + 4 > bytes.size()) ingest_error(file, offset, "truncated header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& file) {
  try {
    return read_file_bytes(file);
  } catch (const Error&) {
    ingest_error(file, 0, "cannot open file");
  }
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path, const std::string& name,
                        int num_classes) {
  const auto images = slurp(images_path);
  const auto labels = slurp(labels_path);

  const std::uint32_t image_magic = read_be32(images, 0, images_path);
  if (image_magic != kIdxImagesMagic) ingest_error(images_path, 0, "bad magic for an IDX image file");
  const std::uint32_t n = read_be32(images, 4, images_path);
  const std::uint32_t rows = read_be32(images, 8, images_path);
  const std::uint32_t cols = read_be32(images, 12, images_path);
  if (n == 0 || rows == 0 || cols == 0) ingest_error(images_path, 4, "zero-sized dimension");
  const std::size_t dim = std::size_t{rows} * cols;
  const std::size_t expected = 16 + std::size_t{n} * dim;
  if (images.size() < expected) {
    ingest_error(images_path, images.size(),
                 "truncated: expected " + std::to_string(expected) + " bytes");
  }

  const std::uint32_t label_magic = read_be32(labels, 0, labels_path);
  if (label_magic != kIdxLabelsMagic) ingest_error(labels_path, 0, "bad magic for an IDX label file");
  const std::uint32_t label_count = read_be32(labels, 4, labels_path);
  if (label_count != n) {
    ingest_error(labels_path, 4, "label count " + std::to_string(label_count) +
                                     " does not match image count " + std::to_string(n));
  }
  if (labels.size() < 8 + std::size_t{n}) {
    ingest_error(labels_path, labels.size(),
                 "truncated: expected " + std::to_string(8 + std::size_t{n}) + " bytes");
  }

  LabeledDataset d;
  d.name = name;
  d.features = Tensor({n, dim});
  auto f = d.features.data();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<double>(images[16 + i]) / 255.0;
  d.labels.resize(n);
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d.labels[i] = labels[8 + i];
    max_label = std::max(max_label, d.labels[i]);
  }
  d.num_classes = num_classes > 0 ? num_classes : max_label + 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (d.labels[i] >= d.num_classes) {
      ingest_error(labels_path, 8 + i, "label " + std::to_string(d.labels[i]) + " out of range");
    }
  }
  return d;
}

void write_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
               const LabeledDataset& data, std::uint32_t rows, std::uint32_t cols) {
  if (std::size_t{rows} * cols != data.dim()) fail(ErrorKind::kConfig, "IDX geometry does not match feature width");
  std::vector<std::uint8_t> img;
  img.reserve(16 + data.features.size());
  put_be32(img, kIdxImagesMagic);
  put_be32(img, static_cast<std::uint32_t>(data.size()));
  put_be32(img, rows);
  put_be32(img, cols);
  for (double v : data.features.data()) {
    img.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  std::vector<std::uint8_t> lab;
  put_be32(lab, kIdxLabelsMagic);
  put_be32(lab, static_cast<std::uint32_t>(data.size()));
  for (int y : data.labels) lab.push_back(static_cast<std::uint8_t>(y));
  write_file_atomic(images_path, img);
  write_file_atomic(labels_path, lab);
}

IdxPair mnist_files(const std::filesystem::path& dir, bool train) {
  const std::string stem = train ? "train" : "t10k";
  return {dir / (stem + "-images-idx3-ubyte"), dir / (stem + "-labels-idx1-ubyte")};
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("IBLAB_DATA_DIR"); env && *env) return env;
  return "data";
}

}  // namespace iblab
