#pragma once

#include <cstdint>

namespace posit::hw {

/// Fixed-width wire bundle of at most 64 bits. Shifts are logical within the
/// width; bits shifted past either end are lost.
class BitVec {
 public:
  static constexpr int kMaxWidth = 64;

  BitVec(int width, std::uint64_t bits);

  int width() const noexcept { return width_; }
  std::uint64_t bits() const noexcept { return bits_; }

  bool bit(int i) const noexcept { return ((bits_ >> i) & 1u) != 0; }
  bool msb() const noexcept { return bit(width_ - 1); }

  /// Bits [hi:lo] as a new vector of width hi - lo + 1.
  BitVec slice(int hi, int lo) const;

  /// Left shift, zeros enter at the LSB.
  BitVec shl(int amount) const;
  /// Right shift, `fill` enters at the MSB.
  BitVec shr(int amount, bool fill = false) const;

  /// Two's complement negation within the width.
  BitVec negate() const;

  /// Number of leading zeros counted from the MSB; width when all zero.
  int lzd() const noexcept;
  /// Number of leading ones counted from the MSB; width when all one.
  int lod() const noexcept;

  friend bool operator==(const BitVec&, const BitVec&) = default;

 private:
  std::uint64_t mask() const noexcept {
    return width_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width_) - 1u;
  }

  int width_;
  std::uint64_t bits_;
};

}  // namespace posit::hw
