#pragma once

#include <cstdint>

#include "posit/config.hpp"
#include "posit/hw/bitvec.hpp"
#include "posit/posit.hpp"

namespace posit::hw {

/// Floating-point view of a posit as produced by the decoder and consumed by
/// the encoder. `mantissa` carries an explicit hidden bit at position
/// `width - 1`; value = (-1)^sign * mantissa * 2^(eff_exp - (width - 1)).
struct FpFields {
  int sign = 0;
  int eff_exp = 0;
  std::uint64_t mantissa = 0;
  int width = 1;
  bool zero = false;
  bool nar = false;

  static FpFields make_zero(int width) { return FpFields{0, 0, 0, width, true, false}; }
  static FpFields make_nar(int width) { return FpFields{0, 0, 0, width, false, true}; }

  bool normalized() const noexcept { return zero || nar || ((mantissa >> (width - 1)) & 1u) != 0; }

  /// Exact for width <= 64. Not meaningful for NaR.
  WideReal value() const noexcept;

  friend bool operator==(const FpFields&, const FpFields&) = default;
};

/// Leading-run detectors over the regime field.
inline int lzd(const BitVec& v) noexcept { return v.lzd(); }
inline int lod(const BitVec& v) noexcept { return v.lod(); }

/// Reference decoder: one left shifter whose amount is the regime run length
/// plus one (the terminating bit), produced by an incrementer.
FpFields decoder_original(const PositBits& p);

/// Decoder without the incrementer: the leading-zero and leading-one paths
/// each drive their own shifter and the terminating bit is dropped by a fixed
/// one-bit shift.
FpFields decoder_optimized(const PositBits& p);

/// Reference encoder: a 2n-bit REM word (terminator, es exponent bits,
/// fraction) is right-shifted by the regime run length, filling with the
/// regime bit. The run length r or r+1 comes from one incrementer.
PositBits encoder_original(const FpFields& f, const PositConfig& config);

/// Encoder without the incrementer: separate shifters for the positive and
/// negative regime paths, each fed a REM pre-shifted by one bit.
PositBits encoder_optimized(const FpFields& f, const PositConfig& config);

}  // namespace posit::hw
