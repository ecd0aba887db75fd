#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "posit/config.hpp"
#include "posit/posit.hpp"

namespace posit::hw {

/// Largest n for which every pattern may be enumerated.
inline constexpr int kMaxExhaustiveBits = 16;
/// Largest n for which every MAC operand pair is enumerated.
inline constexpr int kMaxExhaustiveMacBits = 10;

struct CheckResult {
  std::uint64_t checked = 0;
  std::uint64_t passed = 0;
  std::optional<std::string> counterexample;

  bool pass() const noexcept { return checked == passed; }
  /// `describe` is only invoked for the first failure.
  template <class Describe>
  void record(bool ok, Describe&& describe) {
    ++checked;
    if (ok) {
      ++passed;
    } else if (!counterexample) {
      counterexample = describe();
    }
  }
};

struct VerifyOptions {
  bool exhaustive = false;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
};

struct VerifyReport {
  PositConfig config;
  bool exhaustive = false;
  CheckResult decoder;
  CheckResult encoder;
  CheckResult mac;
  std::uint64_t mac_pairs = 0;
  bool mac_exhaustive = false;

  bool pass() const noexcept { return decoder.pass() && encoder.pass() && mac.pass(); }
  void write(std::ostream& out) const;
};

/// Checks both decoders against each other and posit-core, both encoders
/// against each other and quantize_real, and the MAC against the exact
/// result quantized by posit-core, with accumulators 0 and +-maxpos/2.
/// Exhaustive mode throws ConfigError for n > 16.
VerifyReport verify_datapath(const PositConfig& config, const VerifyOptions& options);

/// Round-to-zero posit of the exact sum hi + lo, where lo is the rounding
/// residue of hi (|lo| <= ulp(hi) / 2, as produced by TwoSum).
PositBits truncate_exact_sum(WideReal hi, WideReal lo, const PositConfig& config);

}  // namespace posit::hw
