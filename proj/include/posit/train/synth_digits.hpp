#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "posit/train/idx.hpp"

namespace posit::train {

/// Handwriting-like 28x28 digits rendered from jittered stroke skeletons
/// under a random affine map, stroke width and pixel noise. Labels cycle
/// 0..9 so every class has count / 10 samples (+1 for the first count % 10).
struct SynthDigits {
  IdxImages images;
  std::vector<std::uint8_t> labels;
};

SynthDigits make_synth_digits(std::size_t count, std::uint64_t seed);

/// MNIST file names, so a real MNIST download can replace the generated set.
inline constexpr const char* kTrainImagesFile = "train-images-idx3-ubyte";
inline constexpr const char* kTrainLabelsFile = "train-labels-idx1-ubyte";
inline constexpr const char* kValImagesFile = "t10k-images-idx3-ubyte";
inline constexpr const char* kValLabelsFile = "t10k-labels-idx1-ubyte";

/// Writes the four IDX files into dir (created if needed). The validation
/// set uses a seed derived from `seed` so it never repeats training images.
void write_synth_digit_files(const std::filesystem::path& dir, std::size_t train_count, std::size_t val_count,
                             std::uint64_t seed);

}  // namespace posit::train
