#pragma once

#include <filesystem>
#include <string>

#include "iblab/data/dataset.h"

namespace iblab {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Reads an IDX image/label file pair (big-endian, as distributed for MNIST
/// and FashionMNIST). Images are flattened and scaled by 1/255. Any malformed
/// input is an ErrorKind::kData error naming the file and byte offset.
/// num_classes = 0 infers max(label) + 1.
LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path,
                        const std::string& name = "idx", int num_classes = 0);

/// Writes `data` back as an IDX pair with the given image geometry; pixel
/// values are round(255 * feature).
void write_idx(const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, const LabeledDataset& data,
               std::uint32_t rows, std::uint32_t cols);

struct IdxPair {
  std::filesystem::path images;
  std::filesystem::path labels;
};

// Standard MNIST/FashionMNIST file names inside `dir`.
IdxPair mnist_files(const std::filesystem::path& dir, bool train);

// $IBLAB_DATA_DIR, or "data" when unset.
std::filesystem::path default_data_dir();

}  // namespace iblab
