#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace posit {

/// Widest real type used for exact posit values. Every (n <= 32, es <= 4)
/// posit and every product of two such posits is exact in it.
using WideReal = long double;

static_assert(std::numeric_limits<WideReal>::digits >= 64,
              "posit-core needs a real type with at least a 64-bit significand");

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Format parameters of an (n, es) posit and the constants derived from them.
/// Construct through make_config(), which validates the ranges.
class PositConfig {
 public:
  static constexpr int kMinBits = 2;
  static constexpr int kMaxBits = 32;
  static constexpr int kMaxEs = 4;

  int n() const noexcept { return n_; }
  int es() const noexcept { return es_; }

  /// 2^(2^es), exact.
  std::uint32_t useed() const noexcept { return std::uint32_t{1} << (1u << es_); }
  /// log2(useed) = 2^es.
  int useed_log2() const noexcept { return 1 << es_; }
  /// log2(maxpos) = (n - 2) * 2^es; minpos is its negation.
  int max_scale() const noexcept { return (n_ - 2) << es_; }

  WideReal maxpos() const noexcept { return std::ldexp(WideReal{1}, max_scale()); }
  WideReal minpos() const noexcept { return std::ldexp(WideReal{1}, -max_scale()); }

  std::uint32_t mask() const noexcept {
    return n_ == 32 ? 0xFFFFFFFFu : (std::uint32_t{1} << n_) - 1u;
  }
  std::uint32_t nar_bits() const noexcept { return std::uint32_t{1} << (n_ - 1); }
  /// Largest positive pattern 01...1.
  std::uint32_t maxpos_bits() const noexcept { return nar_bits() - 1u; }

  std::string name() const;

  friend bool operator==(const PositConfig&, const PositConfig&) = default;

 private:
  friend PositConfig make_config(int n, int es);
  PositConfig(int n, int es) noexcept : n_(n), es_(es) {}

  int n_;
  int es_;
};

/// Throws ConfigError unless 2 <= n <= 32 and 0 <= es <= 4.
PositConfig make_config(int n, int es);

}  // namespace posit
