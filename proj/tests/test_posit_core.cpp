#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracle.hpp"
#include "posit/dyadic.hpp"
#include "posit/posit.hpp"

using namespace posit;

namespace {

PositBits pattern(const char* binary, const PositConfig& cfg) {
  return make_bits(static_cast<std::uint32_t>(std::stoul(binary, nullptr, 2)), cfg);
}

// n in [2, 12] crossed with es in [0, 4].
std::vector<PositConfig> small_configs() {
  std::vector<PositConfig> out;
  for (int n = 2; n <= 12; ++n) {
    for (int es = 0; es <= 4; ++es) out.push_back(make_config(n, es));
  }
  return out;
}

}  // namespace

TEST(PositConfig, DerivedConstants) {
  const auto c51 = make_config(5, 1);
  EXPECT_EQ(c51.useed(), 4u);
  EXPECT_EQ(c51.maxpos(), 64.0L);
  EXPECT_EQ(c51.minpos(), 1.0L / 64.0L);

  const auto c80 = make_config(8, 0);
  EXPECT_EQ(c80.useed(), 2u);
  EXPECT_EQ(c80.maxpos(), 64.0L);

  const auto c161 = make_config(16, 1);
  EXPECT_EQ(c161.useed(), 4u);
  EXPECT_EQ(c161.maxpos(), std::pow(4.0L, 14));
  EXPECT_EQ(c161.minpos() * c161.maxpos(), 1.0L);

  EXPECT_EQ(make_config(32, 4).useed(), 65536u);
  EXPECT_EQ(make_config(32, 4).max_scale(), 30 * 16);
}

TEST(PositConfig, RejectsOutOfRange) {
  EXPECT_THROW(make_config(1, 0), ConfigError);
  EXPECT_THROW(make_config(33, 0), ConfigError);
  EXPECT_THROW(make_config(8, -1), ConfigError);
  EXPECT_THROW(make_config(8, 5), ConfigError);
  EXPECT_NO_THROW(make_config(2, 0));
  EXPECT_NO_THROW(make_config(32, 4));
}

struct GoldenRow {
  const char* bits;
  const char* regime;
  const char* exponent;
  const char* mantissa;
  const char* value;
};

// The published (5,1) table of positive values.
const GoldenRow kFiveOne[] = {
    {"00000", "x", "x", "x", "0"},     {"00001", "-3", "0", "0", "1/64"}, {"00010", "-2", "0", "0", "1/16"},
    {"00011", "-2", "1", "0", "1/8"},  {"00100", "-1", "0", "0", "1/4"},  {"00101", "-1", "0", "1/2", "3/8"},
    {"00110", "-1", "1", "0", "1/2"},  {"00111", "-1", "1", "1/2", "3/4"}, {"01000", "0", "0", "0", "1"},
    {"01001", "0", "0", "1/2", "3/2"},  {"01010", "0", "1", "0", "2"},     {"01011", "0", "1", "1/2", "3"},
    {"01100", "1", "0", "0", "4"},     {"01101", "1", "1", "0", "8"},     {"01110", "2", "0", "0", "16"},
    {"01111", "3", "0", "0", "64"},
};

TEST(PositTable, FiveOneMatchesPublishedRows) {
  const auto rows = enumerate_table(make_config(5, 1));
  ASSERT_EQ(rows.size(), 16u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const GoldenRow& g = kFiveOne[i];
    SCOPED_TRACE(g.bits);
    EXPECT_EQ(rows[i].bits.to_binary(), g.bits);
    EXPECT_EQ(format_fraction(rows[i].value), g.value);
    if (rows[i].fields) {
      EXPECT_EQ(std::to_string(rows[i].fields->k), g.regime);
      EXPECT_EQ(std::to_string(rows[i].fields->e), g.exponent);
      EXPECT_EQ(format_fraction(rows[i].fields->f()), g.mantissa);
    } else {
      EXPECT_STREQ(g.regime, "x");
    }
  }
}

TEST(PositTable, SmallFormats) {
  const auto t30 = enumerate_table(make_config(3, 0));
  ASSERT_EQ(t30.size(), 4u);
  const char* v30[] = {"0", "1/2", "1", "2"};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(format_fraction(t30[i].value), v30[i]);
  EXPECT_EQ(t30[3].bits.to_binary(), "011");

  const auto t20 = enumerate_table(make_config(2, 0));
  ASSERT_EQ(t20.size(), 2u);
  EXPECT_EQ(t20[0].bits.to_binary(), "00");
  EXPECT_EQ(t20[0].value, 0.0L);
  EXPECT_EQ(t20[1].bits.to_binary(), "01");
  EXPECT_EQ(t20[1].value, 1.0L);
}

TEST(PositTable, RefusesWideFormats) {
  EXPECT_NO_THROW(enumerate_table(make_config(12, 0)));
  EXPECT_THROW(enumerate_table(make_config(13, 0)), ConfigError);
  EXPECT_THROW(enumerate_table(make_config(20, 1)), ConfigError);
}

TEST(Quantize, WorkedExamples) {
  const auto cfg = make_config(5, 1);
  EXPECT_EQ(quantize_real(0.01L, cfg), 0.0L);
  EXPECT_EQ(quantize_real(100.0L, cfg), 64.0L);
  EXPECT_EQ(quantize_real(0.4L, cfg), 0.375L);
  EXPECT_EQ(quantize_real(0.6L, cfg), 0.5L);
  EXPECT_EQ(quantize_real(-0.4L, cfg), -0.375L);
  EXPECT_EQ(quantize_real(6.0L, cfg), 4.0L);
  EXPECT_EQ(quantize_real(-100.0L, cfg), -64.0L);
  EXPECT_EQ(quantize_real(1.0L / 64, cfg), 1.0L / 64);
  EXPECT_EQ(quantize_real(0.4, cfg), 0.375);  // double instantiation
}

TEST(Quantize, RejectsNonFinite) {
  const auto cfg = make_config(8, 1);
  EXPECT_THROW(quantize_real(std::numeric_limits<long double>::infinity(), cfg), DomainError);
  EXPECT_THROW(quantize_real(std::nan(""), cfg), DomainError);
  EXPECT_THROW(encode_from_real(-std::numeric_limits<double>::infinity(), cfg), DomainError);
}

TEST(Encode, WorkedExamples) {
  const auto cfg = make_config(5, 1);
  EXPECT_EQ(encode_from_real(0.0L, cfg).to_binary(), "00000");
  EXPECT_EQ(encode_from_real(3.0L, cfg).to_binary(), "01011");
  EXPECT_EQ(encode_from_real(-1.0L, cfg).to_binary(), "11000");
  EXPECT_EQ(encode_from_real(0.4L, cfg).to_binary(), "00101");
  EXPECT_EQ(encode_from_real(-0.4L, cfg).to_binary(), "11011");
  EXPECT_EQ(encode_from_real(1e9L, cfg).to_binary(), "01111");
  EXPECT_EQ(encode_from_real(-1e9L, cfg).to_binary(), "10001");
  EXPECT_EQ(encode_from_real(1e-9L, cfg).to_binary(), "00000");
}

TEST(Decode, WorkedExamples) {
  const auto cfg = make_config(5, 1);
  const auto eight = std::get<PositFields>(decode_fields(pattern("01101", cfg)));
  EXPECT_EQ(eight.sign, 1);
  EXPECT_EQ(eight.k, 1);
  EXPECT_EQ(eight.e, 1);
  EXPECT_EQ(eight.fraction, 0u);
  EXPECT_EQ(eight.rb, 3);

  const auto sixteenth = std::get<PositFields>(decode_fields(pattern("00010", cfg)));
  EXPECT_EQ(sixteenth.k, -2);
  EXPECT_EQ(sixteenth.e, 0);
  EXPECT_EQ(sixteenth.f(), 0.0L);

  EXPECT_EQ(std::get<Special>(decode_fields(pattern("10000", cfg))), Special::NaR);
  EXPECT_EQ(std::get<Special>(decode_fields(pattern("00000", cfg))), Special::Zero);

  EXPECT_EQ(decode_to_real(pattern("00101", cfg)), 0.375L);
  EXPECT_EQ(decode_to_real(pattern("01001", cfg)), 1.5L);
  EXPECT_EQ(decode_to_real(pattern("00000", cfg)), 0.0L);
  EXPECT_EQ(decode_to_real(pattern("11000", cfg)), -1.0L);
  EXPECT_FALSE(decode_to_real(pattern("10000", cfg)).has_value());

  const auto minus = std::get<PositFields>(decode_fields(pattern("11011", cfg)));
  EXPECT_EQ(minus.sign, -1);
  EXPECT_EQ(minus.k, -1);
  EXPECT_EQ(minus.f(), 0.5L);
}

TEST(Decode, MakeBitsRejectsWidePatterns) {
  EXPECT_THROW(make_bits(0x20, make_config(5, 1)), DomainError);
  EXPECT_NO_THROW(make_bits(0x1F, make_config(5, 1)));
}

TEST(Exhaustive, DecodeMatchesDirectEvaluation) {
  for (const auto& cfg : small_configs()) {
    SCOPED_TRACE(cfg.name());
    for (std::uint32_t b = 0; b <= cfg.mask(); ++b) {
      const auto got = decode_to_real(make_bits(b, cfg));
      const long double want = oracle::posit_value(b, cfg.n(), cfg.es());
      if (std::isnan(want)) {
        EXPECT_FALSE(got.has_value());
      } else {
        ASSERT_TRUE(got.has_value());
        ASSERT_EQ(*got, want) << oracle::bit_string(b, cfg.n());
      }
    }
  }
}

TEST(Exhaustive, FieldWidthsAreConsistent) {
  for (const auto& cfg : small_configs()) {
    SCOPED_TRACE(cfg.name());
    for (std::uint32_t b = 1; b < cfg.nar_bits(); ++b) {
      const auto f = std::get<PositFields>(decode_fields(make_bits(b, cfg)));
      ASSERT_LE(1 + f.rb + f.eb + f.fb, cfg.n());
      ASSERT_LE(f.eb, cfg.es());
      ASSERT_GE(f.e, 0);
      ASSERT_LT(f.e, 1 << cfg.es());
      const int expected_rb = f.k >= 0 ? f.k + 2 : -f.k + 1;
      if (b == cfg.maxpos_bits()) {
        ASSERT_EQ(f.rb, cfg.n() - 1);
      } else {
        ASSERT_EQ(f.rb, expected_rb);
      }
      const long double v = std::ldexp(1.0L + f.f(), f.scale(cfg.es()));
      ASSERT_EQ(v, *decode_to_real(make_bits(b, cfg)));
    }
  }
}

TEST(Exhaustive, RoundTripUpToSixteenBits) {
  std::vector<PositConfig> configs = small_configs();
  for (int es = 0; es <= 4; ++es) configs.push_back(make_config(16, es));
  for (const auto& cfg : configs) {
    SCOPED_TRACE(cfg.name());
    for (std::uint32_t b = 0; b <= cfg.mask(); ++b) {
      if (b == cfg.nar_bits()) continue;
      const auto p = make_bits(b, cfg);
      ASSERT_EQ(encode_from_real(*decode_to_real(p), cfg), p) << p.to_binary();
    }
  }
}

TEST(Exhaustive, SignedPatternOrderIsValueOrder) {
  for (const auto& cfg : small_configs()) {
    SCOPED_TRACE(cfg.name());
    std::vector<std::pair<std::int64_t, long double>> seen;
    for (std::uint32_t b = 0; b <= cfg.mask(); ++b) {
      if (b == cfg.nar_bits()) continue;
      const auto p = make_bits(b, cfg);
      seen.emplace_back(p.as_signed(), *decode_to_real(p));
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 1; i < seen.size(); ++i) ASSERT_LT(seen[i - 1].second, seen[i].second);
  }
}

TEST(Exhaustive, RepresentableValuesAreFixedPoints) {
  for (const auto& cfg : small_configs()) {
    SCOPED_TRACE(cfg.name());
    for (const TableRow& row : enumerate_table(cfg)) {
      ASSERT_EQ(quantize_real(row.value, cfg), row.value);
      ASSERT_EQ(quantize_real(-row.value, cfg), -row.value);
    }
  }
}

TEST(Quantize, MatchesTruncationOntoValueSet) {
  std::mt19937_64 rng(11);
  for (const auto& cfg : small_configs()) {
    SCOPED_TRACE(cfg.name());
    const auto positives = oracle::positive_values(cfg.n(), cfg.es());
    const double span = static_cast<double>(cfg.max_scale()) + 3.0;
    std::uniform_real_distribution<double> log2mag(-span, span);
    for (int i = 0; i < 2000; ++i) {
      long double x = std::exp2(static_cast<long double>(log2mag(rng)));
      if ((rng() & 1u) != 0) x = -x;
      ASSERT_EQ(quantize_real(x, cfg), oracle::truncate(x, positives)) << static_cast<double>(x);
      ASSERT_EQ(*decode_to_real(encode_from_real(x, cfg)), quantize_real(x, cfg));
    }
    // Midpoints and neighbours of every representable value.
    for (std::size_t i = 0; i + 1 < positives.size(); ++i) {
      const long double mid = (positives[i] + positives[i + 1]) / 2;
      ASSERT_EQ(quantize_real(mid, cfg), positives[i]);
      ASSERT_EQ(quantize_real(-mid, cfg), -positives[i]);
      ASSERT_EQ(quantize_real(std::nextafter(positives[i + 1], 0.0L), cfg), positives[i]);
    }
  }
}

class WideFormatProperties : public ::testing::TestWithParam<std::pair<int, int>> {};

TEST_P(WideFormatProperties, RandomReals) {
  const auto cfg = make_config(GetParam().first, GetParam().second);
  std::mt19937_64 rng(1234);
  const double span = static_cast<double>(cfg.max_scale()) + 4.0;
  std::uniform_real_distribution<double> log2mag(-span, span);
  std::vector<long double> xs;
  for (int i = 0; i < 20000; ++i) {
    long double x = std::exp2(static_cast<long double>(log2mag(rng)));
    xs.push_back((rng() & 1u) != 0 ? -x : x);
  }
  for (long double x : xs) {
    const long double q = quantize_real(x, cfg);
    ASSERT_EQ(quantize_real(q, cfg), q);
    ASSERT_LE(std::fabs(q), std::fabs(x));
    ASSERT_TRUE(q == 0 || std::signbit(q) == std::signbit(x));
    ASSERT_EQ(*decode_to_real(encode_from_real(x, cfg)), q);
  }
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) ASSERT_LE(quantize_real(xs[i - 1], cfg), quantize_real(xs[i], cfg));
}

TEST_P(WideFormatProperties, PowersOfTwoWithinRange) {
  const auto cfg = make_config(GetParam().first, GetParam().second);
  const int es = cfg.es();
  for (int t = -cfg.max_scale(); t <= cfg.max_scale(); ++t) {
    const int k = t >= 0 ? t >> es : -((-t + (1 << es) - 1) >> es);
    const int e = t - k * (1 << es);
    const int rb = k >= 0 ? k + 2 : -k + 1;
    if (t != cfg.max_scale()) {
      if (rb > cfg.n() - 1) continue;
      const int eb = std::min(cfg.n() - 1 - rb, es);
      if ((e & ((1 << (es - eb)) - 1)) != 0) continue;
    }
    const long double v = std::ldexp(1.0L, t);
    ASSERT_EQ(quantize_real(v, cfg), v) << "2^" << t;
    ASSERT_EQ(quantize_real(-v, cfg), -v) << "-2^" << t;
  }
}

INSTANTIATE_TEST_SUITE_P(Formats, WideFormatProperties,
                         ::testing::Values(std::pair{16, 1}, std::pair{16, 2}, std::pair{24, 3}, std::pair{32, 2},
                                           std::pair{32, 4}, std::pair{8, 1}, std::pair{10, 1}));

TEST(Dyadic, FormatsExactFractions) {
  EXPECT_EQ(format_fraction(0.375L), "3/8");
  EXPECT_EQ(format_fraction(-1.0L / 64), "-1/64");
  EXPECT_EQ(format_fraction(3.0L), "3");
  EXPECT_EQ(format_fraction(0.0L), "0");
  EXPECT_EQ(format_fraction(std::ldexp(1.0L, 70)), "1180591620717411303424");
  EXPECT_EQ(format_fraction(std::ldexp(1.0L, -70)), "1/1180591620717411303424");
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(-2.5), "-2.5");
}
