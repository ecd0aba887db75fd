#include "posit/quantizer.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "posit/posit.hpp"

namespace posit {

std::string format_dims(const std::vector<std::size_t>& dims) {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i != 0) {
      out += ",";
    }
    out += std::to_string(dims[i]);
  }
  return out + "]";
}

double ScaleFactor::value() const noexcept { return std::ldexp(1.0, exponent()); }

namespace {

// Fixed-shape pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> v) {
  constexpr std::size_t kLeaf = 8;
  if (v.size() <= kLeaf) {
    double s = 0.0;
    for (double x : v) {
      s += x;
    }
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  const std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

// quantize_real(v * 2^-shift) * 2^shift on the IEEE fields of v: the exponent
// is truncated to the kept exponent bits and the significand to the kept
// fraction bits. Subnormal inputs and results go through the generic path.
double quantize_scaled(double v, const PositConfig& cfg, int shift) {
  constexpr int kMantBits = 52;
  constexpr std::uint64_t kMantMask = (std::uint64_t{1} << kMantBits) - 1;
  const auto bits = std::bit_cast<std::uint64_t>(v);
  const int biased = static_cast<int>((bits >> kMantBits) & 0x7FF);
  if (v == 0.0) {
    return 0.0;
  }
  if (biased == 0) {
    return std::ldexp(quantize_real(std::ldexp(v, -shift), cfg), shift);
  }
  const std::uint64_t sign = bits & (std::uint64_t{1} << 63);
  const int max_scale = cfg.max_scale();
  const int s = biased - 1023 - shift;
  if (s < -max_scale) {
    return 0.0;
  }
  int out_scale;
  std::uint64_t mant = 0;
  if (s >= max_scale) {
    out_scale = max_scale;
  } else {
    const int es = cfg.es();
    const int n = cfg.n();
    const int k = s >= 0 ? s >> es : -((-s + (1 << es) - 1) >> es);
    const int e = s - k * (1 << es);
    const int rb = k >= 0 ? k + 2 : -k + 1;
    const int eb = std::max(std::min(n - 1 - rb, es), 0);
    const int fb = std::max(n - 1 - rb - eb, 0);
    const int pe = (e >> (es - eb)) << (es - eb);
    out_scale = k * (1 << es) + pe;
    mant = (bits & kMantMask) & ~((std::uint64_t{1} << (kMantBits - fb)) - 1);
  }
  const int out_biased = out_scale + shift + 1023;
  if (out_biased <= 0 || out_biased >= 0x7FF) {
    return std::ldexp(quantize_real(std::ldexp(v, -shift), cfg), shift);
  }
  return std::bit_cast<double>(sign | (static_cast<std::uint64_t>(out_biased) << kMantBits) | mant);
}

}  // namespace

ScaleFactor scale_factor(std::span<const double> x, int sigma) {
  // log2|x| = ilogb|x| + log2(significand). The integer parts are summed
  // exactly so that scaling the tensor by 2^m shifts the center by exactly m.
  std::int64_t exponent_sum = 0;
  std::vector<double> fractional;
  fractional.reserve(x.size());
  for (double v : x) {
    if (v == 0.0 || !std::isfinite(v)) {
      continue;
    }
    const double a = std::fabs(v);
    const int ex = std::ilogb(a);
    exponent_sum += ex;
    fractional.push_back(std::log2(std::ldexp(a, -ex)));
  }
  ScaleFactor sf;
  sf.sigma = sigma;
  if (fractional.empty()) {
    sf.degenerate = true;
    return sf;
  }
  const auto count = static_cast<std::int64_t>(fractional.size());
  const std::int64_t whole = floor_div(exponent_sum, count);
  const std::int64_t remainder = exponent_sum - whole * count;
  const double tail = (static_cast<double>(remainder) + pairwise_sum(fractional)) /
                      static_cast<double>(count);
  sf.center = static_cast<int>(whole + static_cast<std::int64_t>(std::floor(tail + 0.5)));
  return sf;
}

void quantize_in_place(std::span<double> x, const QuantSpec& spec, const std::optional<ScaleFactor>& sf) {
  if (spec.passthrough) {
    return;
  }
  int shift = 0;
  if (spec.scaling_enabled) {
    if (!sf) {
      throw std::invalid_argument("scaling enabled but no scale factor supplied");
    }
    shift = sf->exponent();
  }
  for (double& v : x) {
    if (!std::isfinite(v)) {
      continue;
    }
    v = quantize_scaled(v, spec.config, shift);
  }
}

TensorF quantize_tensor(const TensorF& x, const QuantSpec& spec, const std::optional<ScaleFactor>& sf) {
  TensorF out = x;
  quantize_in_place(out.data, spec, sf);
  return out;
}

double mean_relative_error(std::span<const double> x, std::span<const double> q) {
  if (x.size() != q.size()) {
    throw std::invalid_argument("mean_relative_error: length mismatch");
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      continue;
    }
    total += std::fabs(x[i] - q[i]) / std::fabs(x[i]);
    ++count;
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

Log2Histogram log2_histogram(std::span<const double> x) {
  Log2Histogram h;
  for (double v : x) {
    if (v == 0.0) {
      ++h.zeros;
    } else if (std::isfinite(v)) {
      ++h.bins[std::ilogb(std::fabs(v))];
    }
  }
  return h;
}

void write_histogram_csv(const Log2Histogram& h, std::ostream& out) {
  out << "bin,count\n";
  for (const auto& [bin, count] : h.bins) {
    out << bin << ',' << count << '\n';
  }
  out << "zeros," << h.zeros << '\n';
}

}  // namespace posit
