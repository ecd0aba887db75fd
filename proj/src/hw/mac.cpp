#include "posit/hw/mac.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace posit::hw {

FpAccumulator::FpAccumulator(const PositConfig& config) : config_(config) {
  const int frac = config.n() - 2;
  // One extra bit below the finest product so maxpos/2 is on the grid for n = 2.
  lsb_exp_ = -2 * config.max_scale() - 2 * frac - 1;
  // Largest product magnitude is below 2^(2 * max_scale + 2).
  const int top = 2 * config.max_scale() + 2;
  const int bits = (top - lsb_exp_) + 64 + 1;
  limbs_.assign(static_cast<std::size_t>((bits + 63) / 64), 0);
}

bool FpAccumulator::is_zero() const noexcept {
  if (nar_) {
    return false;
  }
  for (auto limb : limbs_) {
    if (limb != 0) {
      return false;
    }
  }
  return true;
}

void FpAccumulator::add_shifted(std::uint64_t magnitude, int position, bool negative) {
  if (magnitude == 0) {
    return;
  }
  if (position < 0 || position + (64 - std::countl_zero(magnitude)) > bit_width() - 1) {
    throw DomainError("value outside the accumulator window");
  }
  const auto limb = static_cast<std::size_t>(position / 64);
  const int offset = position % 64;
  std::uint64_t addend[2] = {magnitude << offset, offset == 0 ? 0 : magnitude >> (64 - offset)};

  if (!negative) {
    std::uint64_t carry = 0;
    for (std::size_t i = limb; i < limbs_.size(); ++i) {
      const std::uint64_t add = i - limb < 2 ? addend[i - limb] : 0;
      if (add == 0 && carry == 0 && i - limb >= 2) {
        break;
      }
      const std::uint64_t sum = limbs_[i] + add;
      const std::uint64_t c1 = sum < add ? 1 : 0;
      limbs_[i] = sum + carry;
      const std::uint64_t c2 = limbs_[i] < sum ? 1 : 0;
      carry = c1 | c2;
    }
  } else {
    std::uint64_t borrow = 0;
    for (std::size_t i = limb; i < limbs_.size(); ++i) {
      const std::uint64_t sub = i - limb < 2 ? addend[i - limb] : 0;
      if (sub == 0 && borrow == 0 && i - limb >= 2) {
        break;
      }
      const std::uint64_t diff = limbs_[i] - sub;
      const std::uint64_t b1 = limbs_[i] < sub ? 1 : 0;
      limbs_[i] = diff - borrow;
      const std::uint64_t b2 = diff < borrow ? 1 : 0;
      borrow = b1 | b2;
    }
  }
}

FpAccumulator FpAccumulator::from_real(WideReal v, const PositConfig& config) {
  FpAccumulator acc(config);
  if (!std::isfinite(v)) {
    acc.nar_ = true;
    return acc;
  }
  if (v == 0) {
    return acc;
  }
  int exponent = 0;
  const WideReal significand = std::frexp(std::fabs(v), &exponent);
  auto magnitude = static_cast<std::uint64_t>(std::ldexp(significand, 64));
  exponent -= 64;
  while ((magnitude & 1u) == 0) {
    magnitude >>= 1;
    ++exponent;
  }
  if (exponent < acc.lsb_exp_) {
    throw DomainError("value finer than the accumulator resolution");
  }
  acc.add_shifted(magnitude, exponent - acc.lsb_exp_, v < 0);
  return acc;
}

void FpAccumulator::add_product(const FpFields& a, const FpFields& b) {
  if (nar_ || a.nar || b.nar) {
    nar_ = true;
    return;
  }
  if (a.zero || b.zero) {
    return;
  }
  const std::uint64_t product = a.mantissa * b.mantissa;
  const int lsb = (a.eff_exp - (a.width - 1)) + (b.eff_exp - (b.width - 1));
  add_shifted(product, lsb - lsb_exp_, (a.sign ^ b.sign) != 0);
}

FpFields FpAccumulator::to_fields() const {
  if (nar_) {
    return FpFields::make_nar(64);
  }
  if (is_zero()) {
    return FpFields::make_zero(64);
  }
  std::vector<std::uint64_t> mag = limbs_;
  const bool neg = negative();
  if (neg) {
    std::uint64_t carry = 1;
    for (auto& limb : mag) {
      limb = ~limb + carry;
      carry = (carry != 0 && limb == 0) ? 1 : 0;
    }
  }
  std::size_t top = mag.size() - 1;
  while (mag[top] == 0) {
    --top;
  }
  const int lead = 63 - std::countl_zero(mag[top]);
  const int msb = static_cast<int>(top) * 64 + lead;

  // Gather the 64 bits ending at msb.
  std::uint64_t mantissa = 0;
  const int low = msb - 63;
  for (int i = 0; i < 64; ++i) {
    const int pos = low + i;
    if (pos < 0) {
      continue;
    }
    const std::uint64_t bit = (mag[static_cast<std::size_t>(pos / 64)] >> (pos % 64)) & 1u;
    mantissa |= bit << i;
  }

  FpFields out;
  out.sign = neg ? 1 : 0;
  out.eff_exp = msb + lsb_exp_;
  out.mantissa = mantissa;
  out.width = 64;
  return out;
}

WideReal FpAccumulator::to_real() const {
  if (nar_) {
    return std::numeric_limits<WideReal>::quiet_NaN();
  }
  return to_fields().value();
}

MacResult mac(const PositBits& a, const PositBits& b, const FpAccumulator& acc) {
  if (!(a.config == b.config) || !(a.config == acc.config())) {
    throw ConfigError("mac operands use different posit formats");
  }
  MacResult result{acc, PositBits{0, acc.config()}};
  result.acc.add_product(decoder_optimized(a), decoder_optimized(b));
  result.out = encoder_optimized(result.acc.to_fields(), acc.config());
  return result;
}

}  // namespace posit::hw
