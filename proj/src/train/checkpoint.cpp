#include "posit/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "posit/train/idx.hpp"

namespace posit::train {

CheckpointError::CheckpointError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

namespace {

template <class T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <class T>
  T le(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t count, const char* what) {
    need(count, what);
    auto out = bytes_.subspan(pos_, count);
    pos_ += count;
    return out;
  }

  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t count, const char* what) const {
    if (bytes_.size() - pos_ < count) {
      throw CheckpointError(std::string("truncated checkpoint: missing ") + what, pos_);
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(std::span<const NamedTensor> tensors) {
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.tensor.rank()));
    for (std::size_t d : t.tensor.dims) {
      put_le<std::uint64_t>(out, d);
    }
    for (double v : t.tensor.data) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

std::vector<NamedTensor> parse_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError("bad checkpoint magic", 0);
  }
  const std::size_t version_at = r.pos();
  const auto version = r.le<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version), version_at);
  }
  const auto count = r.le<std::uint32_t>("tensor count");
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const auto name_len = r.le<std::uint32_t>("name length");
    const auto name = r.take(name_len, "name");
    t.name.assign(name.begin(), name.end());
    const auto rank = r.le<std::uint32_t>("rank");
    std::vector<std::size_t> dims;
    std::size_t elements = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const std::size_t dim_at = r.pos();
      const auto v = r.le<std::uint64_t>("dimension");
      if (v != 0 && elements > r.remaining() / v) {
        throw CheckpointError("dimension " + std::to_string(v) + " exceeds the file size", dim_at);
      }
      elements *= static_cast<std::size_t>(v);
      dims.push_back(static_cast<std::size_t>(v));
    }
    if (elements > r.remaining() / 8) {
      throw CheckpointError("truncated checkpoint: payload of '" + t.name + "'", r.pos());
    }
    std::vector<double> data(elements);
    for (auto& v : data) {
      v = std::bit_cast<double>(r.le<std::uint64_t>("payload"));
    }
    t.tensor = TensorF(std::move(dims), std::move(data));
    out.push_back(std::move(t));
  }
  if (r.remaining() != 0) {
    throw CheckpointError("trailing bytes after the last tensor", r.pos());
  }
  return out;
}

void write_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> tensors) {
  write_bytes(path, serialize_checkpoint(tensors));
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_checkpoint(bytes);
}

}  // namespace posit::train
