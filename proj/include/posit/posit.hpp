#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "posit/config.hpp"

namespace posit {

/// An n-bit posit pattern. Negative values are the two's complement of the
/// matching positive pattern; bits above n are always zero.
struct PositBits {
  std::uint32_t bits;
  PositConfig config;

  bool is_zero() const noexcept { return bits == 0; }
  bool is_nar() const noexcept { return bits == config.nar_bits(); }
  bool is_negative() const noexcept { return (bits & config.nar_bits()) != 0; }

  /// Pattern read as an n-bit two's-complement integer.
  std::int64_t as_signed() const noexcept {
    return is_negative() ? static_cast<std::int64_t>(bits) - (std::int64_t{1} << config.n())
                         : static_cast<std::int64_t>(bits);
  }

  /// Binary string of exactly n characters, MSB first.
  std::string to_binary() const;

  friend bool operator==(const PositBits&, const PositBits&) = default;
};

PositBits make_bits(std::uint32_t bits, const PositConfig& config);

/// Unpacked fields of a nonzero, non-NaR posit.
///
/// rb is the width the regime actually occupies in the pattern: k + 2 for
/// k >= 0 and -k + 1 for k < 0, except at maxpos where the terminating bit
/// does not fit and rb = n - 1.
struct PositFields {
  int sign;                 // +1 or -1
  int k;                    // regime value
  int e;                    // exponent, missing low bits read as zero
  std::uint32_t fraction;   // fraction bits as an integer, f = fraction / 2^fb
  int rb;
  int eb;
  int fb;

  WideReal f() const noexcept { return std::ldexp(static_cast<WideReal>(fraction), -fb); }
  /// k * 2^es + e
  int scale(int es) const noexcept { return k * (1 << es) + e; }

  friend bool operator==(const PositFields&, const PositFields&) = default;
};

enum class Special { Zero, NaR };

using Decoded = std::variant<PositFields, Special>;

Decoded decode_fields(const PositBits& p);

/// nullopt denotes NaR.
std::optional<WideReal> decode_to_real(const PositBits& p);

namespace detail {

// Intermediate quantities of the real-to-posit transformation.
struct Transform {
  bool zero = true;
  int sign = 1;
  int k = 0;
  int e = 0;
  int rb = 0;
  int eb = 0;
  int fb = 0;
  int pe = 0;                 // exponent after truncation
  std::uint32_t pf_bits = 0;  // truncated fraction, pf = pf_bits / 2^fb
};

inline int floor_div(int a, int b) noexcept {
  const int q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

template <std::floating_point Real>
Transform transform(Real x, const PositConfig& cfg) {
  if (!std::isfinite(x)) {
    throw DomainError("posit quantization of a non-finite value");
  }
  Transform t;
  const Real ax = std::fabs(x);
  const Real minpos = std::ldexp(Real{1}, -cfg.max_scale());
  const Real maxpos = std::ldexp(Real{1}, cfg.max_scale());
  if (ax < minpos) {
    return t;
  }
  t.zero = false;
  t.sign = std::signbit(x) ? -1 : 1;
  const Real clipped = ax > maxpos ? maxpos : ax;

  const int exp = std::ilogb(clipped);
  const int es = cfg.es();
  t.k = floor_div(exp, 1 << es);
  t.e = exp - t.k * (1 << es);
  const Real f = std::ldexp(clipped, -exp) - Real{1};

  const int n = cfg.n();
  t.rb = t.k >= 0 ? t.k + 2 : -t.k + 1;
  t.eb = std::max(std::min(n - 1 - t.rb, es), 0);
  t.fb = std::max(n - 1 - t.rb - t.eb, 0);

  t.pe = (t.e >> (es - t.eb)) << (es - t.eb);
  t.pf_bits = static_cast<std::uint32_t>(std::floor(std::ldexp(f, t.fb)));
  return t;
}

}  // namespace detail

/// Nearest posit value towards zero: zero below minpos, saturating at maxpos,
/// exponent and fraction truncated to the widths left by the regime.
template <std::floating_point Real>
Real quantize_real(Real x, const PositConfig& config) {
  const detail::Transform t = detail::transform(x, config);
  if (t.zero) {
    return Real{0};
  }
  const Real mantissa = Real{1} + std::ldexp(static_cast<Real>(t.pf_bits), -t.fb);
  const Real magnitude = std::ldexp(mantissa, t.k * config.useed_log2() + t.pe);
  return t.sign < 0 ? -magnitude : magnitude;
}

/// Bit pattern whose decoded value equals quantize_real(x, config).
template <std::floating_point Real>
PositBits encode_from_real(Real x, const PositConfig& config) {
  const detail::Transform t = detail::transform(x, config);
  if (t.zero) {
    return PositBits{0, config};
  }
  const int body_width = config.n() - 1;
  std::uint32_t body;
  if (t.rb > body_width) {
    // Regime alone overflows the word: saturated all-ones run.
    body = (std::uint32_t{1} << body_width) - 1u;
  } else {
    const std::uint32_t regime =
        t.k >= 0 ? ((std::uint32_t{1} << (t.k + 1)) - 1u) << 1 : std::uint32_t{1};
    const std::uint32_t exponent = static_cast<std::uint32_t>(t.pe) >> (config.es() - t.eb);
    body = (regime << (body_width - t.rb)) | (exponent << t.fb) | t.pf_bits;
  }
  const std::uint32_t bits = t.sign < 0 ? (0u - body) & config.mask() : body;
  return PositBits{bits, config};
}

struct TableRow {
  PositBits bits;
  std::optional<PositFields> fields;  // empty for the zero pattern
  WideReal value;
};

/// One row per nonnegative pattern 0 ... 2^(n-1) - 1. Refuses n > 12.
std::vector<TableRow> enumerate_table(const PositConfig& config);

inline constexpr int kMaxTableBits = 12;

}  // namespace posit
