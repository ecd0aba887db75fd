#include "posit/posit.hpp"

#include <bit>

namespace posit {

PositBits make_bits(std::uint32_t bits, const PositConfig& config) {
  if ((bits & ~config.mask()) != 0) {
    throw DomainError("bit pattern wider than " + config.name());
  }
  return PositBits{bits, config};
}

std::string PositBits::to_binary() const {
  std::string s(static_cast<std::size_t>(config.n()), '0');
  for (int i = 0; i < config.n(); ++i) {
    if ((bits >> (config.n() - 1 - i)) & 1u) {
      s[static_cast<std::size_t>(i)] = '1';
    }
  }
  return s;
}

Decoded decode_fields(const PositBits& p) {
  const PositConfig& cfg = p.config;
  const std::uint32_t u = p.bits & cfg.mask();
  if (u == 0) {
    return Special::Zero;
  }
  if (u == cfg.nar_bits()) {
    return Special::NaR;
  }

  PositFields out{};
  out.sign = p.is_negative() ? -1 : 1;
  const std::uint32_t magnitude = out.sign < 0 ? (0u - u) & cfg.mask() : u;

  const int width = cfg.n() - 1;
  const std::uint32_t body = magnitude & ((std::uint32_t{1} << width) - 1u);
  const bool leading_one = ((body >> (width - 1)) & 1u) != 0;

  // Left-align the body in 32 bits and measure the run of identical bits.
  const std::uint32_t aligned = body << (32 - width);
  int run = leading_one ? std::countl_one(aligned) : std::countl_zero(aligned);
  run = std::min(run, width);

  out.k = leading_one ? run - 1 : -run;
  out.rb = std::min(run + 1, width);
  const int rest = width - out.rb;
  out.eb = std::min(rest, cfg.es());
  out.fb = rest - out.eb;

  const std::uint32_t exponent_bits = (body >> out.fb) & ((std::uint32_t{1} << out.eb) - 1u);
  out.e = static_cast<int>(exponent_bits << (cfg.es() - out.eb));
  out.fraction = body & ((std::uint32_t{1} << out.fb) - 1u);
  return out;
}

std::optional<WideReal> decode_to_real(const PositBits& p) {
  const Decoded d = decode_fields(p);
  if (const auto* special = std::get_if<Special>(&d)) {
    if (*special == Special::NaR) {
      return std::nullopt;
    }
    return WideReal{0};
  }
  const auto& f = std::get<PositFields>(d);
  const WideReal magnitude = std::ldexp(WideReal{1} + f.f(), f.scale(p.config.es()));
  return f.sign < 0 ? -magnitude : magnitude;
}

std::vector<TableRow> enumerate_table(const PositConfig& config) {
  if (config.n() > kMaxTableBits) {
    throw ConfigError("table too large: " + config.name() + " has more than 2^" +
                      std::to_string(kMaxTableBits - 1) + " nonnegative patterns");
  }
  const std::uint32_t count = config.nar_bits();
  std::vector<TableRow> rows;
  rows.reserve(count);
  for (std::uint32_t b = 0; b < count; ++b) {
    const PositBits bits{b, config};
    TableRow row{bits, std::nullopt, *decode_to_real(bits)};
    const Decoded decoded = decode_fields(bits);
    if (const auto* f = std::get_if<PositFields>(&decoded)) {
      row.fields = *f;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace posit
