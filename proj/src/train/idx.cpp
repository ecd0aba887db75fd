#include "posit/train/idx.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

namespace posit::train {

IdxError::IdxError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32_be(const char* what) {
    if (pos_ + 4 > bytes_.size()) {
      throw IdxError(std::string("truncated IDX header: missing ") + what, pos_);
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    }
    pos_ += 4;
    return v;
  }

  std::span<const std::uint8_t> payload(std::size_t count) {
    if (bytes_.size() - pos_ < count) {
      throw IdxError("truncated IDX payload: expected " + std::to_string(count) + " bytes, found " +
                         std::to_string(bytes_.size() - pos_),
                     bytes_.size());
    }
    auto out = bytes_.subspan(pos_, count);
    pos_ += count;
    return out;
  }

  std::size_t pos() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::uint32_t magic = r.u32_be("magic");
  if (magic != kIdxImagesMagic) {
    throw IdxError("bad IDX image magic", 0);
  }
  IdxImages img;
  img.count = r.u32_be("image count");
  img.rows = r.u32_be("row count");
  img.cols = r.u32_be("column count");
  const auto data = r.payload(img.count * img.rows * img.cols);
  img.pixels.assign(data.begin(), data.end());
  return img;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::uint32_t magic = r.u32_be("magic");
  if (magic != kIdxLabelsMagic) {
    throw IdxError("bad IDX label magic", 0);
  }
  const std::uint32_t count = r.u32_be("label count");
  const auto data = r.payload(count);
  return {data.begin(), data.end()};
}

IdxImages read_idx_images(const std::filesystem::path& path) { return parse_idx_images(read_file(path)); }

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  return parse_idx_labels(read_file(path));
}

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  put_u32_be(out, kIdxImagesMagic);
  put_u32_be(out, static_cast<std::uint32_t>(images.count));
  put_u32_be(out, static_cast<std::uint32_t>(images.rows));
  put_u32_be(out, static_cast<std::uint32_t>(images.cols));
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  put_u32_be(out, kIdxLabelsMagic);
  put_u32_be(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

Dataset make_dataset(const IdxImages& images, std::span<const std::uint8_t> labels) {
  if (images.count != labels.size()) {
    throw std::runtime_error("image count " + std::to_string(images.count) + " does not match label count " +
                             std::to_string(labels.size()));
  }
  Dataset ds;
  ds.images = TensorF({images.count, 1, images.rows, images.cols});
  for (std::size_t i = 0; i < images.pixels.size(); ++i) {
    ds.images[i] = static_cast<double>(images.pixels[i]) / 255.0;
  }
  ds.labels.assign(labels.begin(), labels.end());
  return ds;
}

Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
  return make_dataset(read_idx_images(images), read_idx_labels(labels));
}

ChannelStats channel_stats(const TensorF& images) {
  const std::size_t n = images.dim(0);
  const std::size_t c = images.dim(1);
  const std::size_t plane = images.size() / (n * c);
  ChannelStats s{std::vector<double>(c, 0.0), std::vector<double>(c, 0.0)};
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = &images.data[(i * c + ch) * plane];
      for (std::size_t j = 0; j < plane; ++j) {
        sum += p[j];
        sq += p[j] * p[j];
      }
    }
    const double m = sum / static_cast<double>(n * plane);
    s.mean[ch] = m;
    s.stddev[ch] = std::sqrt(std::max(sq / static_cast<double>(n * plane) - m * m, 1e-12));
  }
  return s;
}

void standardize(TensorF& images, const ChannelStats& stats) {
  const std::size_t n = images.dim(0);
  const std::size_t c = images.dim(1);
  const std::size_t plane = images.size() / (n * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* p = &images.data[(i * c + ch) * plane];
      for (std::size_t j = 0; j < plane; ++j) {
        p[j] = (p[j] - stats.mean[ch]) / stats.stddev[ch];
      }
    }
  }
}

}  // namespace posit::train
