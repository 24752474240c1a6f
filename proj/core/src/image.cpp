#include "qrefine/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qrefine/error.hpp"

namespace qrefine {
namespace {

float clamp_unit(float v) noexcept {
  // NaN collapses to 0 so the [0,1] invariant holds unconditionally.
  if (!(v > 0.0f)) return 0.0f;
  return v < 1.0f ? v : 1.0f;
}

void check_dims(int height, int width) {
  if (height <= 0 || width <= 0) {
    throw Error(ErrorKind::kSize,
                "non-positive dimensions " + std::to_string(height) + "x" + std::to_string(width));
  }
}

std::string dims(int h, int w) { return std::to_string(h) + "x" + std::to_string(w); }

}  // namespace

ImageBuffer::ImageBuffer(int height, int width, float fill) : height_(height), width_(width) {
  check_dims(height, width);
  data_.assign(pixel_count() * kChannels, clamp_unit(fill));
}

ImageBuffer::ImageBuffer(int height, int width, std::vector<float> samples)
    : height_(height), width_(width), data_(std::move(samples)) {
  check_dims(height, width);
  if (data_.size() != pixel_count() * kChannels) {
    throw Error(ErrorKind::kShape, "sample count " + std::to_string(data_.size()) +
                                       " does not match " + dims(height, width) + "x3");
  }
  for (float& v : data_) v = clamp_unit(v);
}

void ImageBuffer::set(int y, int x, int c, float v) noexcept { data_[index(y, x, c)] = clamp_unit(v); }

PixelMap::PixelMap(int height, int width, float fill) : height_(height), width_(width) {
  check_dims(height, width);
  data_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
}

PixelMap::PixelMap(int height, int width, std::vector<float> values)
    : height_(height), width_(width), data_(std::move(values)) {
  check_dims(height, width);
  if (data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error(ErrorKind::kShape, "value count " + std::to_string(data_.size()) +
                                       " does not match " + dims(height, width));
  }
}

PixelMap PixelMap::crop(int row0, int row1, int col0, int col1) const {
  if (row0 < 0 || col0 < 0 || row1 > height_ || col1 > width_ || row0 >= row1 || col0 >= col1) {
    throw Error(ErrorKind::kShape, "crop rectangle outside " + dims(height_, width_));
  }
  PixelMap out(row1 - row0, col1 - col0);
  for (int y = row0; y < row1; ++y) {
    for (int x = col0; x < col1; ++x) out.at(y - row0, x - col0) = at(y, x);
  }
  return out;
}

PixelMap to_luma(const ImageBuffer& img) {
  PixelMap out(img.height(), img.width());
  auto src = img.samples();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    dst[i] = clamp_unit(static_cast<float>(0.299 * r + 0.587 * g + 0.114 * b));
  }
  return out;
}

ImageBuffer blend(const ImageBuffer& base, const ImageBuffer& overlay, const PixelMap& weight) {
  if (!base.same_shape(overlay) || !weight.same_shape(base)) {
    throw Error(ErrorKind::kShape, "blend operands " + dims(base.height(), base.width()) + ", " +
                                       dims(overlay.height(), overlay.width()) + ", weight " +
                                       dims(weight.height(), weight.width()));
  }
  std::vector<float> out(base.samples().begin(), base.samples().end());
  auto over = overlay.samples();
  auto w = weight.values();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const float wi = w[i];
    if (wi == 0.0f) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t k = 3 * i + c;
      out[k] = wi * over[k] + (1.0f - wi) * out[k];
    }
  }
  return ImageBuffer(base.height(), base.width(), std::move(out));
}

float max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::kShape, "max_abs_diff operands differ in shape");
  float worst = 0.0f;
  auto sa = a.samples();
  auto sb = b.samples();
  for (std::size_t i = 0; i < sa.size(); ++i) worst = std::max(worst, std::abs(sa[i] - sb[i]));
  return worst;
}

}  // namespace qrefine
