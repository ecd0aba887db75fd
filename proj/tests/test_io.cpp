#include <gtest/gtest.h>

#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <numeric>

#include "posit/train/checkpoint.hpp"
#include "posit/train/idx.hpp"
#include "posit/train/synth_digits.hpp"

using namespace posit;
using namespace posit::train;

namespace {

std::vector<std::uint8_t> be32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v)};
}

std::vector<std::uint8_t> image_file(std::uint32_t count, std::uint32_t rows, std::uint32_t cols) {
  std::vector<std::uint8_t> bytes;
  for (std::uint32_t v : {0x00000803u, count, rows, cols}) {
    const auto b = be32(v);
    bytes.insert(bytes.end(), b.begin(), b.end());
  }
  for (std::uint32_t i = 0; i < count * rows * cols; ++i) bytes.push_back(static_cast<std::uint8_t>(i % 256));
  return bytes;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("posit_io_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Idx, WellFormedImages) {
  const IdxImages img = parse_idx_images(image_file(4, 28, 28));
  EXPECT_EQ(img.count, 4u);
  EXPECT_EQ(img.rows, 28u);
  EXPECT_EQ(img.cols, 28u);
  std::vector<std::uint8_t> labels{0, 1, 2, 3};
  const Dataset ds = make_dataset(img, labels);
  EXPECT_EQ(ds.images.dims, (std::vector<std::size_t>{4, 1, 28, 28}));
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(ds.images.data[255], 1.0);
  EXPECT_EQ(ds.images.data[0], 0.0);
}

TEST(Idx, TruncatedPayloadReportsOffset) {
  auto bytes = image_file(4, 28, 28);
  bytes.resize(bytes.size() - 10);
  try {
    parse_idx_images(bytes);
    FAIL() << "expected IdxError";
  } catch (const IdxError& e) {
    EXPECT_EQ(e.offset(), bytes.size());
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
  }
}

TEST(Idx, TruncatedHeaderAndBadMagic) {
  auto bytes = image_file(1, 2, 2);
  std::vector<std::uint8_t> header(bytes.begin(), bytes.begin() + 9);
  try {
    parse_idx_images(header);
    FAIL() << "expected IdxError";
  } catch (const IdxError& e) {
    EXPECT_EQ(e.offset(), 8u);
  }
  bytes[3] = 0x01;
  EXPECT_THROW(parse_idx_images(bytes), IdxError);
  EXPECT_THROW(parse_idx_labels(image_file(1, 1, 1)), IdxError);
}

TEST(Idx, LabelsAndSerializationRoundTrip) {
  const std::vector<std::uint8_t> labels{9, 0, 3};
  EXPECT_EQ(parse_idx_labels(serialize_idx_labels(labels)), labels);
  const IdxImages img = parse_idx_images(image_file(3, 2, 5));
  const IdxImages back = parse_idx_images(serialize_idx_images(img));
  EXPECT_EQ(back.pixels, img.pixels);
  EXPECT_EQ(back.cols, 5u);
}

TEST(Idx, CountMismatchIsRejected) {
  const IdxImages img = parse_idx_images(image_file(3, 2, 2));
  const std::vector<std::uint8_t> labels{1, 2};
  EXPECT_THROW(make_dataset(img, labels), std::runtime_error);
}

TEST(Idx, FilesOnDisk) {
  const auto dir = temp_dir("idx");
  write_synth_digit_files(dir, 20, 10, 5);
  const Dataset train = load_idx_dataset(dir / kTrainImagesFile, dir / kTrainLabelsFile);
  const Dataset val = load_idx_dataset(dir / kValImagesFile, dir / kValLabelsFile);
  EXPECT_EQ(train.images.dims, (std::vector<std::size_t>{20, 1, 28, 28}));
  EXPECT_EQ(val.size(), 10u);
  EXPECT_THROW(load_idx_dataset(dir / "missing", dir / kTrainLabelsFile), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(Idx, Standardize) {
  TensorF images({2, 1, 1, 2}, {0.0, 1.0, 1.0, 0.0});
  const ChannelStats stats = channel_stats(images);
  EXPECT_DOUBLE_EQ(stats.mean[0], 0.5);
  EXPECT_DOUBLE_EQ(stats.stddev[0], 0.5);
  standardize(images, stats);
  EXPECT_EQ(images.data, (std::vector<double>{-1.0, 1.0, 1.0, -1.0}));
}

TEST(SynthDigits, DeterministicAndBalanced) {
  const SynthDigits a = make_synth_digits(50, 3);
  const SynthDigits b = make_synth_digits(50, 3);
  const SynthDigits c = make_synth_digits(50, 4);
  EXPECT_EQ(a.images.pixels, b.images.pixels);
  EXPECT_NE(a.images.pixels, c.images.pixels);
  std::vector<int> counts(10);
  for (auto l : a.labels) ++counts[l];
  for (int n : counts) EXPECT_EQ(n, 5);
  // Every image has ink.
  for (std::size_t i = 0; i < 50; ++i) {
    const auto* px = a.images.pixels.data() + i * 784;
    EXPECT_GT(std::accumulate(px, px + 784, 0), 255 * 20);
  }
}

TEST(Checkpoint, RoundTrip) {
  const std::vector<NamedTensor> tensors{{"conv1.weight", TensorF({2, 1, 3, 3}, 0.25)},
                                         {"fc.bias", TensorF({3}, std::vector<double>{-1.5, 0.0, 1e-300})},
                                         {"scalar", TensorF(std::vector<std::size_t>{}, std::vector<double>{7.0})}};
  const auto bytes = serialize_checkpoint(tensors);
  EXPECT_EQ(std::memcmp(bytes.data(), "PSTM", 4), 0);
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[8], 3);  // tensor count
  EXPECT_EQ(parse_checkpoint(bytes), tensors);

  const auto dir = temp_dir("ckpt");
  write_checkpoint(dir / "m.pstm", tensors);
  EXPECT_EQ(read_checkpoint(dir / "m.pstm"), tensors);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, PayloadIsLittleEndianDoubles) {
  const std::vector<NamedTensor> one{{"a", TensorF({1}, std::vector<double>{1.0})}};
  const auto bytes = serialize_checkpoint(one);
  // header 12 | name length 4 | name 1 | rank 4 | dim 8 | payload 8
  ASSERT_EQ(bytes.size(), 12u + 4 + 1 + 4 + 8 + 8);
  const std::vector<std::uint8_t> payload(bytes.end() - 8, bytes.end());
  EXPECT_EQ(payload, (std::vector<std::uint8_t>{0, 0, 0, 0, 0, 0, 0xF0, 0x3F}));
}

TEST(Checkpoint, MalformedInput) {
  const std::vector<NamedTensor> one{{"w", TensorF({2}, 1.0)}};
  auto bytes = serialize_checkpoint(one);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  try {
    parse_checkpoint(bad_magic);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }

  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(parse_checkpoint(bad_version), CheckpointError);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(parse_checkpoint(truncated), CheckpointError);

  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(parse_checkpoint(trailing), CheckpointError);

  EXPECT_THROW(parse_checkpoint(std::vector<std::uint8_t>{}), CheckpointError);
  EXPECT_THROW(read_checkpoint("/nonexistent/file.pstm"), std::runtime_error);
}
