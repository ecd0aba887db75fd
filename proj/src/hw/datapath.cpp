#include "posit/hw/datapath.hpp"

#include <algorithm>
#include <cmath>

namespace posit::hw {

WideReal FpFields::value() const noexcept {
  if (zero || nar) {
    return WideReal{0};
  }
  const WideReal magnitude = std::ldexp(static_cast<WideReal>(mantissa), eff_exp - (width - 1));
  return sign ? -magnitude : magnitude;
}

namespace {

struct DecodeFront {
  bool special = false;
  FpFields fields;
  int sign = 0;
  BitVec body{1, 0};
  bool regime_bit = false;
};

// Sign handling shared by both decoders: flags for 0 / NaR, two's complement
// of negative inputs, and the n-1 bit body after the sign.
DecodeFront decode_front(const PositBits& p) {
  const int n = p.config.n();
  DecodeFront front;
  if (p.is_zero()) {
    front.special = true;
    front.fields = FpFields::make_zero(n - 1);
    return front;
  }
  if (p.is_nar()) {
    front.special = true;
    front.fields = FpFields::make_nar(n - 1);
    return front;
  }
  const BitVec word(n, p.bits);
  front.sign = word.msb() ? 1 : 0;
  const BitVec magnitude = front.sign ? word.negate() : word;
  front.body = magnitude.slice(n - 2, 0);
  front.regime_bit = front.body.msb();
  return front;
}

// Splits the shifted-out body into exponent and fraction and packs the result.
FpFields decode_back(const DecodeFront& front, const BitVec& rest, int k, const PositConfig& cfg) {
  const int n = cfg.n();
  const int es = cfg.es();
  // Append es zero bits so the exponent read never runs off the end.
  const BitVec extended(n - 1 + es, rest.bits() << es);
  const std::uint64_t exponent = es == 0 ? 0 : extended.slice(n - 2 + es, n - 1).bits();
  const BitVec fraction = extended.slice(n - 2, 0);

  FpFields out;
  out.sign = front.sign;
  out.width = n - 1;
  out.eff_exp = k * (1 << es) + static_cast<int>(exponent);
  out.mantissa = (std::uint64_t{1} << (n - 2)) | (fraction.bits() >> 1);
  return out;
}

}  // namespace

FpFields decoder_original(const PositBits& p) {
  const DecodeFront front = decode_front(p);
  if (front.special) {
    return front.fields;
  }
  const int count = front.regime_bit ? lod(front.body) : lzd(front.body);
  const int shift = count + 1;
  const BitVec rest = front.body.shl(shift);
  const int k = front.regime_bit ? count - 1 : -count;
  return decode_back(front, rest, k, p.config);
}

FpFields decoder_optimized(const PositBits& p) {
  const DecodeFront front = decode_front(p);
  if (front.special) {
    return front.fields;
  }
  const int zeros = lzd(front.body);
  const int ones = lod(front.body);
  const BitVec negative_path = front.body.shl(1).shl(zeros);
  const BitVec positive_path = front.body.shl(ones).shl(1);
  const BitVec rest = front.regime_bit ? positive_path : negative_path;

  // One negation serves both signs: -count, or its complement count - 1.
  const int negated = -(front.regime_bit ? ones : zeros);
  const int k = front.regime_bit ? ~negated : negated;
  return decode_back(front, rest, k, p.config);
}

namespace {

struct EncodeFront {
  bool done = false;
  PositBits result;
  int k = 0;
  bool regime_bit = false;
  BitVec rem{1, 0};
};

int rem_width(const PositConfig& cfg) { return std::max(2 * cfg.n(), cfg.es() + 2); }

EncodeFront encode_front(const FpFields& f, const PositConfig& cfg) {
  const int n = cfg.n();
  const int es = cfg.es();
  EncodeFront front{false, PositBits{0, cfg}};
  if (f.nar) {
    front.done = true;
    front.result = PositBits{cfg.nar_bits(), cfg};
    return front;
  }
  if (f.zero) {
    front.done = true;
    return front;
  }
  front.k = f.eff_exp >> es;
  const int e = f.eff_exp & ((1 << es) - 1);
  if (front.k > n - 2) {
    const std::uint32_t body = cfg.maxpos_bits();
    front.done = true;
    front.result = PositBits{f.sign ? (0u - body) & cfg.mask() : body, cfg};
    return front;
  }
  if (front.k < -(n - 2)) {
    front.done = true;  // below minpos truncates to zero
    return front;
  }
  front.regime_bit = front.k >= 0;

  const int width = rem_width(cfg);
  const int fraction_slots = width - 1 - es;
  const int fraction_bits = f.width - 1;
  std::uint64_t fraction = fraction_bits == 0 ? 0 : f.mantissa & ((std::uint64_t{1} << fraction_bits) - 1u);
  if (fraction_bits > fraction_slots) {
    fraction >>= fraction_bits - fraction_slots;
  } else {
    fraction <<= fraction_slots - fraction_bits;
  }
  const std::uint64_t terminator = front.regime_bit ? 0u : 1u;
  front.rem = BitVec(width, (terminator << (width - 1)) |
                                (static_cast<std::uint64_t>(e) << fraction_slots) | fraction);
  return front;
}

PositBits encode_back(const BitVec& shifted, int sign, const PositConfig& cfg) {
  const int n = cfg.n();
  const BitVec body = shifted.slice(shifted.width() - 1, shifted.width() - (n - 1));
  const BitVec word(n, body.bits());
  return PositBits{static_cast<std::uint32_t>((sign ? word.negate() : word).bits()), cfg};
}

}  // namespace

PositBits encoder_original(const FpFields& f, const PositConfig& config) {
  const EncodeFront front = encode_front(f, config);
  if (front.done) {
    return front.result;
  }
  // Run length: k + 1 ones for k >= 0, -k zeros otherwise (~k + 1 = -k).
  const int shift = (front.regime_bit ? front.k : ~front.k) + 1;
  return encode_back(front.rem.shr(shift, front.regime_bit), f.sign, config);
}

PositBits encoder_optimized(const FpFields& f, const PositConfig& config) {
  const EncodeFront front = encode_front(f, config);
  if (front.done) {
    return front.result;
  }
  const BitVec positive_path = front.rem.shr(1, true).shr(front.k, true);
  const BitVec negative_path = front.rem.shr(1, false).shr(~front.k, false);
  return encode_back(front.regime_bit ? positive_path : negative_path, f.sign, config);
}

}  // namespace posit::hw
