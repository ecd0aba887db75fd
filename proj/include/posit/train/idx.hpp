#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "posit/tensor.hpp"

namespace posit::train {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Malformed IDX input; offset is the byte position where parsing failed.
class IdxError : public std::runtime_error {
 public:
  IdxError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major
};

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images);
std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

struct Dataset {
  TensorF images;           // [N, 1, rows, cols], pixels / 255
  std::vector<int> labels;  // N entries

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
};

Dataset make_dataset(const IdxImages& images, std::span<const std::uint8_t> labels);

/// Reads an image/label IDX pair and normalizes pixels to [0, 1].
Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Per-channel mean and standard deviation of a [N, C, ...] tensor.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};
ChannelStats channel_stats(const TensorF& images);
void standardize(TensorF& images, const ChannelStats& stats);

}  // namespace posit::train
