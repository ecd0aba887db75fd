#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>

#include "posit/config.hpp"
#include "posit/tensor.hpp"

namespace posit {

inline constexpr int kDefaultSigma = 2;

/// Quantization policy for one class of tensors.
struct QuantSpec {
  PositConfig config = make_config(16, 1);
  bool scaling_enabled = true;
  int sigma = kDefaultSigma;
  bool passthrough = false;

  static QuantSpec identity() {
    QuantSpec s;
    s.passthrough = true;
    s.scaling_enabled = false;
    return s;
  }
  static QuantSpec posit(int n, int es, bool scaling = true, int sigma = kDefaultSigma) {
    return QuantSpec{make_config(n, es), scaling, sigma, false};
  }

  friend bool operator==(const QuantSpec&, const QuantSpec&) = default;
};

/// Power-of-two shift aligning a tensor's log2 center with the posit's
/// high-precision region: value = 2^(center + sigma).
struct ScaleFactor {
  int center = 0;
  int sigma = kDefaultSigma;
  bool degenerate = false;  // no nonzero element to measure

  int exponent() const noexcept { return center + sigma; }
  double value() const noexcept;

  friend bool operator==(const ScaleFactor&, const ScaleFactor&) = default;
};

/// center = floor(mean(log2|x_i|) + 1/2) over the nonzero finite elements.
/// All-zero tensors give center 0 and the degenerate flag.
ScaleFactor scale_factor(std::span<const double> x, int sigma = kDefaultSigma);
inline ScaleFactor scale_factor(const TensorF& x, int sigma = kDefaultSigma) {
  return scale_factor(std::span<const double>(x.data), sigma);
}

/// Elementwise P(x / S_f) * S_f. sf must be present iff scaling is enabled
/// (ignored for passthrough specs). Non-finite elements pass through unchanged.
TensorF quantize_tensor(const TensorF& x, const QuantSpec& spec, const std::optional<ScaleFactor>& sf);
void quantize_in_place(std::span<double> x, const QuantSpec& spec, const std::optional<ScaleFactor>& sf);

/// Mean of |x - q| / |x| over nonzero elements of x; 0 when x has none.
double mean_relative_error(std::span<const double> x, std::span<const double> q);

struct Log2Histogram {
  std::map<int, std::uint64_t> bins;  // floor(log2|x|) -> count
  std::uint64_t zeros = 0;

  friend bool operator==(const Log2Histogram&, const Log2Histogram&) = default;
};

Log2Histogram log2_histogram(std::span<const double> x);

/// "bin,count" header, one row per bin in ascending order, then "zeros,<count>".
void write_histogram_csv(const Log2Histogram& h, std::ostream& out);

}  // namespace posit
