#include "posit/dyadic.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <vector>

namespace posit {

namespace {

// Little-endian base-10^9 digits.
class Decimal {
 public:
  explicit Decimal(std::uint64_t v) {
    do {
      limbs_.push_back(static_cast<std::uint32_t>(v % kBase));
      v /= kBase;
    } while (v != 0);
  }

  void shift_left(int bits) {
    for (; bits > 0; bits -= 16) {
      const std::uint64_t factor = std::uint64_t{1} << std::min(bits, 16);
      std::uint64_t carry = 0;
      for (auto& limb : limbs_) {
        const std::uint64_t cur = limb * factor + carry;
        limb = static_cast<std::uint32_t>(cur % kBase);
        carry = cur / kBase;
      }
      while (carry != 0) {
        limbs_.push_back(static_cast<std::uint32_t>(carry % kBase));
        carry /= kBase;
      }
    }
  }

  std::string str() const {
    std::string out = std::to_string(limbs_.back());
    for (auto it = limbs_.rbegin() + 1; it != limbs_.rend(); ++it) {
      std::string part = std::to_string(*it);
      out.append(9 - part.size(), '0');
      out += part;
    }
    return out;
  }

 private:
  static constexpr std::uint64_t kBase = 1000000000;
  std::vector<std::uint32_t> limbs_;
};

std::string power_of_two(int exponent) {
  Decimal d(1);
  d.shift_left(exponent);
  return d.str();
}

}  // namespace

std::string format_fraction(WideReal value) {
  if (value == 0) {
    return "0";
  }
  if (!std::isfinite(value)) {
    return "NaR";
  }
  std::string sign = value < 0 ? "-" : "";
  int exponent = 0;
  const WideReal significand = std::frexp(std::fabs(value), &exponent);
  // 64 bits hold every significand of WideReal on the supported platforms.
  auto numerator = static_cast<std::uint64_t>(std::ldexp(significand, 64));
  exponent -= 64;
  while ((numerator & 1u) == 0) {
    numerator >>= 1;
    ++exponent;
  }
  if (exponent >= 0) {
    Decimal d(numerator);
    d.shift_left(exponent);
    return sign + d.str();
  }
  return sign + std::to_string(numerator) + "/" + power_of_two(-exponent);
}

std::string format_real(double value) {
  std::array<char, 32> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

}  // namespace posit
