#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "posit/tensor.hpp"

namespace posit::train {

// Container layout, all integers little-endian:
//   "PSTM" | u32 version | u32 tensor count
//   per tensor: u32 name length | name bytes | u32 rank | u64 dims[rank] | f64 payload
inline constexpr char kCheckpointMagic[4] = {'P', 'S', 'T', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

struct NamedTensor {
  std::string name;
  TensorF tensor;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

std::vector<std::uint8_t> serialize_checkpoint(std::span<const NamedTensor> tensors);
std::vector<NamedTensor> parse_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

}  // namespace posit::train
