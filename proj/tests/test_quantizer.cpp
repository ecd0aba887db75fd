#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "posit/posit.hpp"
#include "posit/quantizer.hpp"

using namespace posit;

namespace {

// Mean of log2|x| over nonzero elements in long double, rounded half-up.
int reference_center(const std::vector<double>& x) {
  long double sum = 0;
  int count = 0;
  for (double v : x) {
    if (v == 0.0) continue;
    sum += std::log2(static_cast<long double>(std::fabs(v)));
    ++count;
  }
  return static_cast<int>(std::floor(sum / count + 0.5L));
}

std::vector<double> log_normal(std::mt19937_64& rng, std::size_t count, double center, double spread) {
  std::normal_distribution<double> g(center, spread);
  std::vector<double> x(count);
  for (double& v : x) v = std::exp2(g(rng)) * ((rng() & 1u) != 0 ? -1.0 : 1.0);
  return x;
}

}  // namespace

TEST(ScaleFactor, WorkedExamples) {
  const auto quarter = scale_factor(std::vector<double>{0.25, 0.25}, 2);
  EXPECT_EQ(quarter.center, -2);
  EXPECT_EQ(quarter.value(), 1.0);

  const auto powers = scale_factor(std::vector<double>{1, 2, 4, 8}, 2);
  EXPECT_EQ(powers.center, 2);
  EXPECT_EQ(powers.value(), 16.0);

  const auto single = scale_factor(std::vector<double>{8}, 2);
  EXPECT_EQ(single.center, 3);
  EXPECT_EQ(single.value(), 32.0);

  EXPECT_EQ(scale_factor(std::vector<double>{-8, 0, 0}, 2).center, 3);
  EXPECT_EQ(scale_factor(std::vector<double>{8}, 0).value(), 8.0);
}

TEST(ScaleFactor, AllZeroTensorIsDegenerate) {
  const auto sf = scale_factor(std::vector<double>{0.0, 0.0, -0.0}, 2);
  EXPECT_TRUE(sf.degenerate);
  EXPECT_EQ(sf.center, 0);
  EXPECT_EQ(sf.value(), 4.0);
  EXPECT_TRUE(scale_factor(std::vector<double>{}, 3).degenerate);
  EXPECT_FALSE(scale_factor(std::vector<double>{1e-300}, 2).degenerate);
}

TEST(ScaleFactor, MatchesDirectMeanOnRandomTensors) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> center(-30, 30);
  for (int i = 0; i < 500; ++i) {
    const auto x = log_normal(rng, 1 + rng() % 300, center(rng), 3.0);
    ASSERT_EQ(scale_factor(x, 2).center, reference_center(x));
  }
}

TEST(ScaleFactor, ShiftEquivariance) {
  std::mt19937_64 rng(8);
  std::vector<std::vector<double>> tensors{{1, 2, 4, 8}, {0.5, 1}, {3.0}, {1, 2}};
  for (int i = 0; i < 200; ++i) tensors.push_back(log_normal(rng, 1 + rng() % 100, -5.0, 4.0));
  for (const auto& x : tensors) {
    const int base = scale_factor(x, 2).center;
    for (int m = -60; m <= 60; m += 3) {
      std::vector<double> shifted(x);
      for (double& v : shifted) v = std::ldexp(v, m);
      ASSERT_EQ(scale_factor(shifted, 2).center, base + m) << "shift " << m;
    }
  }
}

TEST(QuantizeTensor, WorkedExamples) {
  const auto s51 = QuantSpec::posit(5, 1, true, 2);
  EXPECT_EQ(quantize_tensor(TensorF({1}, {64.0}), s51, ScaleFactor{4, 2, false}).data, std::vector<double>{64.0});

  const auto plain = QuantSpec::posit(5, 1, false);
  EXPECT_EQ(quantize_tensor(TensorF({1}, {0.4}), plain, std::nullopt).data, std::vector<double>{0.375});
  EXPECT_EQ(quantize_tensor(TensorF({1}, {0.01}), plain, std::nullopt).data, std::vector<double>{0.0});

  // 0.4 * 2^10 scaled by 2^10 lands on 0.375 * 2^10.
  EXPECT_EQ(quantize_tensor(TensorF({1}, {409.6}), s51, ScaleFactor{8, 2, false}).data[0], 384.0);
}

TEST(QuantizeTensor, PassthroughIsBitwiseIdentity) {
  TensorF x({5}, {0.1, -0.0, std::nan(""), std::numeric_limits<double>::infinity(), 1e-310});
  const TensorF q = quantize_tensor(x, QuantSpec::identity(), std::nullopt);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(q.data[i]), std::bit_cast<std::uint64_t>(x.data[i]));
  }
  EXPECT_EQ(q.dims, x.dims);
}

TEST(QuantizeTensor, ScalingNeedsAFactor) {
  EXPECT_THROW(quantize_tensor(TensorF({1}, {1.0}), QuantSpec::posit(8, 1, true), std::nullopt),
               std::invalid_argument);
}

TEST(QuantizeTensor, NonFiniteElementsPassThrough) {
  const TensorF q = quantize_tensor(TensorF({3}, {std::nan(""), -std::numeric_limits<double>::infinity(), 0.4}),
                                    QuantSpec::posit(5, 1, false), std::nullopt);
  EXPECT_TRUE(std::isnan(q.data[0]));
  EXPECT_EQ(q.data[1], -std::numeric_limits<double>::infinity());
  EXPECT_EQ(q.data[2], 0.375);
}

TEST(QuantizeTensor, AgreesWithScalarQuantizerEverywhere) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> log2mag(-1070, 1020);
  std::vector<double> x;
  for (int i = 0; i < 4000; ++i) x.push_back(std::exp2(log2mag(rng)) * ((rng() & 1u) != 0 ? -1.0 : 1.0));
  for (double v : {0.0, -0.0, 4.9e-324, -4.9e-324, 2.2250738585072014e-308, 1.7976931348623157e308}) x.push_back(v);
  for (int n : {2, 3, 5, 8, 12, 16, 24, 32}) {
    for (int es = 0; es <= 4; ++es) {
      const auto cfg = make_config(n, es);
      for (int exponent : {-1000, -40, -2, 0, 3, 57, 1000}) {
        const QuantSpec spec = QuantSpec::posit(n, es, true, 2);
        const ScaleFactor sf{exponent - 2, 2, false};
        const TensorF q = quantize_tensor(TensorF({x.size()}, x), spec, sf);
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (!std::isfinite(std::ldexp(x[i], -exponent))) continue;
          const double want = std::ldexp(quantize_real(std::ldexp(x[i], -exponent), cfg), exponent);
          ASSERT_EQ(std::bit_cast<std::uint64_t>(q.data[i]), std::bit_cast<std::uint64_t>(want))
              << cfg.name() << " x=" << x[i] << " shift=" << exponent;
        }
      }
    }
  }
}

TEST(QuantizeTensor, Properties) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = log_normal(rng, 257, -6.0, 5.0);
    const TensorF t({x.size()}, x);
    const QuantSpec spec = QuantSpec::posit(8, 1, true, 2);
    const ScaleFactor sf = scale_factor(t, 2);
    const TensorF once = quantize_tensor(t, spec, sf);
    EXPECT_EQ(quantize_tensor(once, spec, sf), once);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_LE(std::fabs(once.data[i]), std::fabs(x[i]));

    const TensorF unit = quantize_tensor(t, spec, ScaleFactor{-2, 2, false});
    const TensorF plain = quantize_tensor(t, QuantSpec::posit(8, 1, false), std::nullopt);
    EXPECT_EQ(unit, plain);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(plain.data[i], quantize_real(x[i], spec.config));
  }
}

TEST(QuantizeTensor, ScalingReducesErrorOffCenter) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> magnitude(4.0, 12.0);
  const QuantSpec scaled = QuantSpec::posit(8, 1, true, 2);
  const QuantSpec unscaled = QuantSpec::posit(8, 1, false);
  double scaled_total = 0.0;
  double unscaled_total = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double c = magnitude(rng) * ((rng() & 1u) != 0 ? -1.0 : 1.0);
    const TensorF x({256}, log_normal(rng, 256, c, 1.0));
    scaled_total += mean_relative_error(x.data, quantize_tensor(x, scaled, scale_factor(x, 2)).data);
    unscaled_total += mean_relative_error(x.data, quantize_tensor(x, unscaled, std::nullopt).data);
  }
  EXPECT_LE(scaled_total, unscaled_total);
}

TEST(MeanRelativeError, Basics) {
  const std::vector<double> x{1.0, 0.0, -4.0};
  const std::vector<double> q{0.5, 0.0, -4.0};
  EXPECT_DOUBLE_EQ(mean_relative_error(x, q), 0.25);
  EXPECT_EQ(mean_relative_error(std::vector<double>{0.0}, std::vector<double>{0.0}), 0.0);
  EXPECT_THROW(mean_relative_error(x, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Histogram, Bins) {
  const auto h = log2_histogram(std::vector<double>{1, 2, 4});
  EXPECT_EQ(h.bins, (std::map<int, std::uint64_t>{{0, 1}, {1, 1}, {2, 1}}));
  EXPECT_EQ(h.zeros, 0u);

  const auto z = log2_histogram(std::vector<double>{0, 0});
  EXPECT_TRUE(z.bins.empty());
  EXPECT_EQ(z.zeros, 2u);

  const auto f = log2_histogram(std::vector<double>{0.3, -0.6});
  EXPECT_EQ(f.bins, (std::map<int, std::uint64_t>{{-2, 1}, {-1, 1}}));
}

TEST(Histogram, CsvLayout) {
  std::ostringstream out;
  write_histogram_csv(log2_histogram(std::vector<double>{0.3, 0.6, 0.0, 5.0}), out);
  EXPECT_EQ(out.str(), "bin,count\n-2,1\n-1,1\n2,1\nzeros,1\n");
}

TEST(Tensor, DimsMustMatchData) {
  EXPECT_THROW(TensorF({2, 2}, std::vector<double>{1, 2, 3}), std::invalid_argument);
  EXPECT_EQ(TensorF({2, 3}).size(), 6u);
  EXPECT_EQ(format_dims({2, 3}), "[2,3]");
}
