#include "posit/hw/bitvec.hpp"

#include <bit>
#include <stdexcept>

namespace posit::hw {

BitVec::BitVec(int width, std::uint64_t bits) : width_(width), bits_(0) {
  if (width < 1 || width > kMaxWidth) {
    throw std::invalid_argument("BitVec width must be in [1, 64]");
  }
  bits_ = bits & mask();
}

BitVec BitVec::slice(int hi, int lo) const {
  if (lo < 0 || hi >= width_ || hi < lo) {
    throw std::out_of_range("BitVec slice outside the vector");
  }
  return BitVec(hi - lo + 1, bits_ >> lo);
}

BitVec BitVec::shl(int amount) const {
  if (amount >= width_) {
    return BitVec(width_, 0);
  }
  return BitVec(width_, bits_ << amount);
}

BitVec BitVec::shr(int amount, bool fill) const {
  if (amount >= width_) {
    return BitVec(width_, fill ? mask() : 0);
  }
  std::uint64_t out = bits_ >> amount;
  if (fill && amount > 0) {
    out |= mask() & ~(mask() >> amount);
  }
  return BitVec(width_, out);
}

BitVec BitVec::negate() const { return BitVec(width_, (~bits_ + 1u)); }

int BitVec::lzd() const noexcept {
  const int lead = std::countl_zero(bits_ << (64 - width_));
  return lead > width_ ? width_ : lead;
}

int BitVec::lod() const noexcept {
  const std::uint64_t aligned = bits_ << (64 - width_);
  const int lead = std::countl_one(aligned);
  return lead > width_ ? width_ : lead;
}

}  // namespace posit::hw
