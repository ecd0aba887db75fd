#include "posit/hw/verify.hpp"

#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "posit/dyadic.hpp"
#include "posit/hw/datapath.hpp"
#include "posit/hw/mac.hpp"

namespace posit::hw {

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << "0x" << std::hex << v;
  return s.str();
}

std::string describe(const FpFields& f) {
  std::ostringstream s;
  if (f.nar) {
    return "{nar}";
  }
  if (f.zero) {
    return "{zero}";
  }
  s << "{sign=" << f.sign << " eff_exp=" << f.eff_exp << " mantissa=" << hex(f.mantissa)
    << " width=" << f.width << "}";
  return s.str();
}

bool same_value(const std::optional<WideReal>& decoded, const FpFields& f) {
  if (!decoded) {
    return f.nar;
  }
  if (*decoded == 0) {
    return f.zero && !f.nar;
  }
  return !f.zero && !f.nar && f.normalized() && f.value() == *decoded;
}

void check_pattern(const PositBits& p, VerifyReport& report) {
  const FpFields original = decoder_original(p);
  const FpFields optimized = decoder_optimized(p);
  const bool decoder_ok = original == optimized && same_value(decode_to_real(p), optimized);
  report.decoder.record(decoder_ok, [&] { return "pattern " + hex(p.bits) + " decoded to " + describe(optimized); });

  const PositBits back_original = encoder_original(optimized, p.config);
  const PositBits back_optimized = encoder_optimized(optimized, p.config);
  const bool round_trip = back_original == p && back_optimized == p;
  report.encoder.record(round_trip, [&] { return "round trip of pattern " + hex(p.bits) + " gave " +
                                        hex(back_original.bits) + "/" + hex(back_optimized.bits); });
}

void check_fields(const FpFields& f, const PositConfig& cfg, VerifyReport& report) {
  const PositBits a = encoder_original(f, cfg);
  const PositBits b = encoder_optimized(f, cfg);
  bool ok = a == b;
  if (ok) {
    if (f.nar) {
      ok = a.is_nar();
    } else {
      ok = decode_to_real(a) == std::optional<WideReal>(quantize_real(f.value(), cfg));
    }
  }
  report.encoder.record(ok, [&] { return "fields " + describe(f) + " encoded to " + hex(a.bits) + "/" + hex(b.bits); });
}

FpFields random_fields(std::mt19937_64& rng, const PositConfig& cfg) {
  const int span = cfg.max_scale() + 2 * cfg.useed_log2();
  std::uniform_int_distribution<int> exp_dist(-span, span);
  std::uniform_int_distribution<int> width_dist(1, 64);
  std::uniform_int_distribution<int> kind(0, 63);

  FpFields f;
  const int pick = kind(rng);
  if (pick == 0) {
    return FpFields::make_zero(cfg.n() - 1);
  }
  if (pick == 1) {
    return FpFields::make_nar(cfg.n() - 1);
  }
  f.width = pick < 32 ? cfg.n() - 1 : width_dist(rng);
  f.sign = static_cast<int>(rng() & 1u);
  f.eff_exp = exp_dist(rng);
  const std::uint64_t hidden = std::uint64_t{1} << (f.width - 1);
  const std::uint64_t low = f.width == 1 ? 0 : rng() & (hidden - 1u);
  f.mantissa = hidden | low;
  return f;
}

// Exact acc + a*b, split into a rounded sum and its residue.
std::pair<WideReal, WideReal> exact_mac(WideReal acc, WideReal a, WideReal b) {
  const WideReal product = a * b;  // exact: both significands fit in 32 bits
  const WideReal sum = acc + product;
  const WideReal bv = sum - acc;
  const WideReal av = sum - bv;
  const WideReal residue = (acc - av) + (product - bv);
  return {sum, residue};
}

void check_mac(const PositBits& a, const PositBits& b, const FpAccumulator& acc, WideReal acc_value,
               VerifyReport& report) {
  const MacResult r = mac(a, b, acc);
  const auto va = decode_to_real(a);
  const auto vb = decode_to_real(b);
  PositBits expected{a.config.nar_bits(), a.config};
  if (va && vb) {
    const auto [hi, lo] = exact_mac(acc_value, *va, *vb);
    expected = truncate_exact_sum(hi, lo, a.config);
  }
  report.mac.record(r.out == expected, [&] { return "a=" + hex(a.bits) + " b=" + hex(b.bits) + " acc=" +
                                           format_fraction(acc_value) + " gave " + hex(r.out.bits) +
                                           " expected " + hex(expected.bits); });
}

}  // namespace

PositBits truncate_exact_sum(WideReal hi, WideReal lo, const PositConfig& config) {
  const PositBits q = encode_from_real(hi, config);
  if (lo == 0 || decode_to_real(q) != std::optional<WideReal>(hi)) {
    return q;
  }
  if (std::signbit(lo) == std::signbit(hi)) {
    return q;
  }
  // hi is a posit and the exact value lies just inside it: step toward zero.
  const std::uint32_t stepped = q.is_negative() ? q.bits + 1u : q.bits - 1u;
  return PositBits{stepped & config.mask(), config};
}

VerifyReport verify_datapath(const PositConfig& config, const VerifyOptions& options) {
  if (options.exhaustive && config.n() > kMaxExhaustiveBits) {
    throw ConfigError("exhaustive verification is limited to n <= " + std::to_string(kMaxExhaustiveBits) +
                      "; use --samples for " + config.name());
  }
  VerifyReport report{config, options.exhaustive, {}, {}, {}, 0, false};
  std::mt19937_64 rng(options.seed);

  const std::uint64_t patterns = std::uint64_t{1} << config.n();
  if (options.exhaustive) {
    for (std::uint64_t b = 0; b < patterns; ++b) {
      check_pattern(PositBits{static_cast<std::uint32_t>(b), config}, report);
    }
  } else {
    std::uniform_int_distribution<std::uint64_t> pick(0, patterns - 1);
    for (std::uint64_t i = 0; i < options.samples; ++i) {
      check_pattern(PositBits{static_cast<std::uint32_t>(pick(rng)), config}, report);
    }
  }

  const std::uint64_t sweeps = options.exhaustive ? std::max<std::uint64_t>(options.samples, 65536) : options.samples;
  for (std::uint64_t i = 0; i < sweeps; ++i) {
    check_fields(random_fields(rng, config), config, report);
  }

  const WideReal half_max = config.maxpos() / 2;
  const std::array<WideReal, 3> acc_values{WideReal{0}, half_max, -half_max};
  std::vector<FpAccumulator> accs;
  for (WideReal v : acc_values) {
    accs.push_back(FpAccumulator::from_real(v, config));
  }

  report.mac_exhaustive = options.exhaustive && config.n() <= kMaxExhaustiveMacBits;
  if (report.mac_exhaustive) {
    report.mac_pairs = patterns * patterns;
    for (std::uint64_t a = 0; a < patterns; ++a) {
      for (std::uint64_t b = 0; b < patterns; ++b) {
        for (std::size_t i = 0; i < accs.size(); ++i) {
          check_mac(PositBits{static_cast<std::uint32_t>(a), config},
                    PositBits{static_cast<std::uint32_t>(b), config}, accs[i], acc_values[i], report);
        }
      }
    }
  } else {
    report.mac_pairs = options.samples;
    std::uniform_int_distribution<std::uint64_t> pick(0, patterns - 1);
    for (std::uint64_t i = 0; i < options.samples; ++i) {
      const PositBits a{static_cast<std::uint32_t>(pick(rng)), config};
      const PositBits b{static_cast<std::uint32_t>(pick(rng)), config};
      for (std::size_t j = 0; j < accs.size(); ++j) {
        check_mac(a, b, accs[j], acc_values[j], report);
      }
    }
  }
  return report;
}

void VerifyReport::write(std::ostream& out) const {
  auto status = [](const CheckResult& c) { return c.pass() ? "PASS" : "FAIL"; };
  auto detail = [&](const char* name, const CheckResult& c) {
    out << name << ": " << c.passed << "/" << c.checked << " " << status(c) << "\n";
    if (c.counterexample) {
      out << "  first counterexample: " << *c.counterexample << "\n";
    }
  };
  out << "format: " << config.name() << (exhaustive ? " exhaustive" : " sampled") << "\n";
  detail("decoder", decoder);
  detail("encoder", encoder);
  detail("mac", mac);
  out << "decoder: " << decoder.passed << "/" << decoder.checked << " " << status(decoder)
      << "; encoder: " << status(encoder) << "; mac: " << mac_pairs
      << (mac_exhaustive ? " pairs " : " sampled pairs ") << status(mac) << "\n";
}

}  // namespace posit::hw
