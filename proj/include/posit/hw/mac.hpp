#pragma once

#include <cstdint>
#include <vector>

#include "posit/hw/datapath.hpp"

namespace posit::hw {

/// Exact fixed-point accumulator for sums of posit products. The window runs
/// from just below the weight of the smallest product bit, minpos^2 * 2^-2(n-2), up to
/// maxpos^2 with 64 carry guard bits, stored as a two's-complement integer.
class FpAccumulator {
 public:
  explicit FpAccumulator(const PositConfig& config);

  /// Exact value v; throws DomainError if v is not on the accumulator grid.
  static FpAccumulator from_real(WideReal v, const PositConfig& config);

  const PositConfig& config() const noexcept { return config_; }
  bool is_nar() const noexcept { return nar_; }
  bool is_zero() const noexcept;

  void set_nar() noexcept { nar_ = true; }

  /// acc += a * b, exact. Either operand NaR makes the accumulator NaR.
  void add_product(const FpFields& a, const FpFields& b);

  /// Sign, exponent and the leading 64 bits of the magnitude. Bits below the
  /// leading 64 are dropped, which is exact for round-to-zero encoding.
  FpFields to_fields() const;

  /// Value rounded to WideReal; exact when the magnitude spans <= 64 bits.
  WideReal to_real() const;

  /// Weight of bit 0 as a power of two.
  int lsb_exponent() const noexcept { return lsb_exp_; }
  int bit_width() const noexcept { return static_cast<int>(limbs_.size()) * 64; }

 private:
  void add_shifted(std::uint64_t magnitude, int position, bool negative);
  bool negative() const noexcept { return (limbs_.back() >> 63) != 0; }

  PositConfig config_;
  int lsb_exp_;
  std::vector<std::uint64_t> limbs_;
  bool nar_ = false;
};

struct MacResult {
  FpAccumulator acc;
  PositBits out;
};

/// Decoder -> exact multiply-accumulate -> encoder.
MacResult mac(const PositBits& a, const PositBits& b, const FpAccumulator& acc);

}  // namespace posit::hw
