#include "qrefine/quality_field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "qrefine/error.hpp"

namespace qrefine {
namespace {

constexpr double kKeysA = -0.5;

// Per-output-coordinate tap indices (border-clamped) and weights.
struct Taps {
  std::array<int, 4> index;
  std::array<double, 4> weight;
};

std::vector<Taps> axis_taps(int extent, int n) {
  std::vector<Taps> taps(static_cast<std::size_t>(extent));
  for (int x = 0; x < extent; ++x) {
    const double u = static_cast<double>(x) * n / extent - 0.5;
    const double base = std::floor(u);
    const double frac = u - base;
    Taps& t = taps[static_cast<std::size_t>(x)];
    for (int r = -1; r <= 2; ++r) {
      const int k = r + 1;
      t.index[k] = std::clamp(static_cast<int>(base) + r, 0, n - 1);
      t.weight[k] = keys_cubic(r - frac);
    }
  }
  return taps;
}

void check_threshold(double b, const char* name) {
  if (!(b > 0.0 && b < 1.0)) {
    throw Error(ErrorKind::kConfig, std::string(name) + " must lie in (0,1), got " + std::to_string(b));
  }
}

}  // namespace

double keys_cubic(double t) noexcept {
  const double a = kKeysA;
  t = std::abs(t);
  if (t < 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

FlattenedQualityMap flatten_bicubic(const QualityMap& map, int height, int width) {
  const int n = map.n();
  if (height < n || width < n) {
    throw Error(ErrorKind::kSize, "flatten target smaller than the quality grid");
  }
  const auto rows = axis_taps(height, n);
  const auto cols = axis_taps(width, n);

  // Horizontal pass over each grid row, then vertical pass per pixel.
  std::vector<double> horiz(static_cast<std::size_t>(n) * width);
  for (int i = 0; i < n; ++i) {
    for (int x = 0; x < width; ++x) {
      const Taps& t = cols[static_cast<std::size_t>(x)];
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += t.weight[k] * map.at(i, t.index[k]);
      horiz[static_cast<std::size_t>(i) * width + x] = acc;
    }
  }
  FlattenedQualityMap out(height, width);
  for (int y = 0; y < height; ++y) {
    const Taps& t = rows[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += t.weight[k] * horiz[static_cast<std::size_t>(t.index[k]) * width + x];
      out.at(y, x) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
    }
  }
  return out;
}

NoiseWeightMap noise_weight(const FlattenedQualityMap& flat, double b_lq) {
  check_threshold(b_lq, "b_lq");
  NoiseWeightMap out(flat.height(), flat.width());
  const float bound = static_cast<float>(b_lq);
  auto src = flat.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::max(bound - src[i], 0.0f);
  return out;
}

InpaintMask make_mask(const FlattenedQualityMap& flat, double b_mq) {
  check_threshold(b_mq, "b_mq");
  InpaintMask out(flat.height(), flat.width());
  const float bound = static_cast<float>(b_mq);
  auto src = flat.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] < bound ? 1.0f : 0.0f;
  return out;
}

double mask_fraction(const InpaintMask& mask) {
  const auto v = mask.values();
  if (v.empty()) return 0.0;
  const auto on = std::count(v.begin(), v.end(), 1.0f);
  return static_cast<double>(on) / static_cast<double>(v.size());
}

Bytes encode_mask_png(const InpaintMask& mask) { return encode_gray_png(mask); }

InpaintMask decode_mask_png(std::span<const std::uint8_t> bytes, DecodeOptions options) {
  InpaintMask mask = decode_gray(bytes, options);
  for (float& v : mask.values()) v = v >= 128.0f / 255.0f ? 1.0f : 0.0f;
  return mask;
}

}  // namespace qrefine
