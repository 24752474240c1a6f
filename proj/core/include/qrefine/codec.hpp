#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qrefine/image.hpp"

namespace qrefine {

using Bytes = std::vector<std::uint8_t>;

struct DecodeOptions {
  /// Smallest accepted side length; smaller images raise kSize.
  int min_side = ImageBuffer::kMinRefinableSide;
};

/// Decodes a PNG or JPEG stream (sniffed from the signature). Samples map
/// by v/255, grayscale is replicated to RGB, alpha is dropped and 16-bit
/// PNGs are reduced to 8 bits.
ImageBuffer decode_image(std::span<const std::uint8_t> bytes, DecodeOptions options = {});

/// 8-bit RGB PNG, non-interlaced, byte-for-byte reproducible.
/// Quantization is round(v*255) with ties away from zero.
Bytes encode_png(const ImageBuffer& img);

/// 8-bit grayscale PNG of a single-channel field (values clamped to [0,1]
/// and quantized like encode_png). Used for masks and quality heatmaps.
Bytes encode_gray_png(const PixelMap& field);

/// Decodes any PNG/JPEG and returns its first channel scaled to [0,1].
PixelMap decode_gray(std::span<const std::uint8_t> bytes, DecodeOptions options = {});

std::uint8_t quantize(float v) noexcept;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace qrefine
