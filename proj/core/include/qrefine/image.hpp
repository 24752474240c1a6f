#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qrefine {

/// Row-major RGB image with float samples in [0,1].
///
/// Every mutating entry point clamps, so a buffer never holds a sample
/// outside the unit interval. Any positive size is representable; the
/// 8×8 minimum for refinement is enforced by the decoder and the pipeline
/// (see kMinRefinableSide).
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;
  static constexpr int kMinRefinableSide = 8;

  ImageBuffer() = default;
  ImageBuffer(int height, int width, float fill = 0.0f);
  /// Takes ownership of `samples` (height*width*3 values) and clamps them.
  ImageBuffer(int height, int width, std::vector<float> samples);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  bool empty() const noexcept { return data_.empty(); }

  float at(int y, int x, int c) const noexcept { return data_[index(y, x, c)]; }
  void set(int y, int x, int c, float v) noexcept;

  std::span<const float> samples() const noexcept { return data_; }

  bool same_shape(const ImageBuffer& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * kChannels + static_cast<std::size_t>(c);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// Single-channel row-major float field. Carries luma, quality fields,
/// noise weights and masks. Values are not clamped.
class PixelMap {
 public:
  PixelMap() = default;
  PixelMap(int height, int width, float fill = 0.0f);
  PixelMap(int height, int width, std::vector<float> values);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  float at(int y, int x) const noexcept { return data_[index(y, x)]; }
  float& at(int y, int x) noexcept { return data_[index(y, x)]; }

  std::span<const float> values() const noexcept { return data_; }
  std::span<float> values() noexcept { return data_; }

  /// Copy of the rectangle [row0,row1) × [col0,col1).
  PixelMap crop(int row0, int row1, int col0, int col1) const;

  bool same_shape(const PixelMap& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool same_shape(const ImageBuffer& img) const noexcept {
    return height_ == img.height() && width_ == img.width();
  }

  friend bool operator==(const PixelMap&, const PixelMap&) = default;

 private:
  std::size_t index(int y, int x) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// Rec.601 luma: 0.299 R + 0.587 G + 0.114 B.
PixelMap to_luma(const ImageBuffer& img);

/// out = weight*overlay + (1-weight)*base per pixel, clamped. Where the
/// weight is exactly zero the base sample is copied through untouched.
/// Throws kShape when the three operands disagree on dimensions.
ImageBuffer blend(const ImageBuffer& base, const ImageBuffer& overlay, const PixelMap& weight);

/// Largest absolute per-sample difference; both images must share a shape.
float max_abs_diff(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace qrefine
