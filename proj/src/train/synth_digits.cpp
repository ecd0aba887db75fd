#include "posit/train/synth_digits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace posit::train {

namespace {

struct Pt {
  double x;
  double y;
};

using Stroke = std::vector<Pt>;

Stroke ellipse(double cx, double cy, double rx, double ry, double from = 0.0, double to = 2.0 * std::numbers::pi) {
  Stroke s;
  constexpr int kSegments = 20;
  for (int i = 0; i <= kSegments; ++i) {
    const double a = from + (to - from) * i / kSegments;
    s.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
  }
  return s;
}

// Skeletons in a unit box, y pointing down.
std::vector<Stroke> skeleton(int digit) {
  const double pi = std::numbers::pi;
  switch (digit) {
    case 0: return {ellipse(0.5, 0.5, 0.27, 0.4)};
    case 1: return {{{0.36, 0.24}, {0.52, 0.1}, {0.52, 0.9}}};
    case 2: return {{{0.24, 0.28}, {0.34, 0.14}, {0.52, 0.1}, {0.7, 0.16}, {0.75, 0.32}, {0.66, 0.5}, {0.24, 0.9},
                     {0.8, 0.9}}};
    case 3: return {{{0.24, 0.16}, {0.5, 0.1}, {0.73, 0.2}, {0.7, 0.4}, {0.45, 0.5}, {0.74, 0.6}, {0.77, 0.8},
                     {0.52, 0.92}, {0.22, 0.85}}};
    case 4: return {{{0.64, 0.9}, {0.64, 0.1}, {0.2, 0.64}, {0.82, 0.64}}};
    case 5: return {{{0.76, 0.1}, {0.32, 0.1}, {0.28, 0.46}, {0.5, 0.4}, {0.72, 0.5}, {0.76, 0.72}, {0.56, 0.9},
                     {0.24, 0.85}}};
    case 6: return {{{0.7, 0.12}, {0.46, 0.2}, {0.3, 0.46}}, ellipse(0.5, 0.68, 0.22, 0.22, pi, 3.0 * pi)};
    case 7: return {{{0.2, 0.1}, {0.8, 0.1}, {0.44, 0.9}}};
    case 8: return {ellipse(0.5, 0.29, 0.19, 0.19), ellipse(0.5, 0.7, 0.24, 0.21)};
    case 9: return {ellipse(0.5, 0.32, 0.22, 0.21), {{0.72, 0.32}, {0.68, 0.6}, {0.58, 0.9}}};
    default: return {};
  }
}

double segment_distance(Pt p, Pt a, Pt b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = p.x - (a.x + t * dx), ey = p.y - (a.y + t * dy);
  return std::sqrt(ex * ex + ey * ey);
}

void render(int digit, std::mt19937_64& rng, std::uint8_t* out, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double angle = 0.35 * u(rng);
  const double shear = 0.35 * u(rng);
  const double sx = 18.0 * (1.0 + 0.18 * u(rng));
  const double sy = 20.0 * (1.0 + 0.15 * u(rng));
  const double tx = static_cast<double>(cols) / 2.0 + 2.5 * u(rng);
  const double ty = static_cast<double>(rows) / 2.0 + 2.5 * u(rng);
  const double width = 2.2 + 0.9 * u(rng);
  const double ca = std::cos(angle), sa = std::sin(angle);

  std::vector<std::pair<Pt, Pt>> segments;
  for (const Stroke& s : skeleton(digit)) {
    Stroke placed;
    for (Pt p : s) {
      const double gx = (p.x - 0.5 + 0.07 * u(rng) + shear * (p.y - 0.5)) * sx;
      const double gy = (p.y - 0.5 + 0.07 * u(rng)) * sy;
      placed.push_back({tx + ca * gx - sa * gy, ty + sa * gx + ca * gy});
    }
    for (std::size_t i = 1; i < placed.size(); ++i) segments.emplace_back(placed[i - 1], placed[i]);
  }
  // Occasional stray stroke.
  if (u(rng) > 0.4) {
    const Pt a{tx + 12.0 * u(rng), ty + 12.0 * u(rng)};
    segments.emplace_back(a, Pt{a.x + 6.0 * u(rng), a.y + 6.0 * u(rng)});
  }

  std::normal_distribution<double> noise(0.0, 0.12);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const Pt p{static_cast<double>(c) + 0.5, static_cast<double>(r) + 0.5};
      double d = 1e9;
      for (const auto& [a, b] : segments) d = std::min(d, segment_distance(p, a, b));
      double v = std::clamp(width / 2.0 - d + 0.5, 0.0, 1.0);
      v = std::clamp(v + noise(rng), 0.0, 1.0);
      out[r * cols + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
}

}  // namespace

SynthDigits make_synth_digits(std::size_t count, std::uint64_t seed) {
  constexpr std::size_t kSide = 28;
  SynthDigits d;
  d.images.count = count;
  d.images.rows = kSide;
  d.images.cols = kSide;
  d.images.pixels.resize(count * kSide * kSide);
  d.labels.resize(count);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const int digit = static_cast<int>(i % 10);
    d.labels[i] = static_cast<std::uint8_t>(digit);
    render(digit, rng, d.images.pixels.data() + i * kSide * kSide, kSide, kSide);
  }
  return d;
}

void write_synth_digit_files(const std::filesystem::path& dir, std::size_t train_count, std::size_t val_count,
                             std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const SynthDigits train = make_synth_digits(train_count, seed);
  const SynthDigits val = make_synth_digits(val_count, seed ^ 0x9E3779B97F4A7C15ull);
  write_bytes(dir / kTrainImagesFile, serialize_idx_images(train.images));
  write_bytes(dir / kTrainLabelsFile, serialize_idx_labels(train.labels));
  write_bytes(dir / kValImagesFile, serialize_idx_images(val.images));
  write_bytes(dir / kValLabelsFile, serialize_idx_labels(val.labels));
}

}  // namespace posit::train
