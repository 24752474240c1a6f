#pragma once

#include "qrefine/codec.hpp"
#include "qrefine/image.hpp"
#include "qrefine/iqa.hpp"

namespace qrefine {

// Pixel-resolution fields derived from a QualityMap. All are PixelMaps;
// the aliases document which invariant a value carries.
using FlattenedQualityMap = PixelMap;  // values in [0,1]
using NoiseWeightMap = PixelMap;       // values in [0, B_LQ]
using InpaintMask = PixelMap;          // values in {0,1}, 1 = modify

/// Keys cubic convolution kernel with a = -0.5.
double keys_cubic(double t) noexcept;

/// Bicubic upsampling of an n×n map to h×w. Node (i,j) sits at pixel
/// coordinate ((i+0.5)·h/n, (j+0.5)·w/n); each output pixel sums the 4×4
/// surrounding nodes with border-clamped indices. Output clamped to [0,1].
FlattenedQualityMap flatten_bicubic(const QualityMap& map, int height, int width);

/// W = max(B_LQ − Q, 0). Throws kConfig unless 0 < b_lq < 1.
NoiseWeightMap noise_weight(const FlattenedQualityMap& flat, double b_lq);

/// 1 where flat < B_MQ (strict), else 0. Throws kConfig unless 0 < b_mq < 1.
InpaintMask make_mask(const FlattenedQualityMap& flat, double b_mq);

/// Fraction of pixels equal to 1.
double mask_fraction(const InpaintMask& mask);

/// 8-bit grayscale mask, 255 = modify, 0 = preserve.
Bytes encode_mask_png(const InpaintMask& mask);
/// Inverse of encode_mask_png; any sample ≥ 128 counts as "modify".
InpaintMask decode_mask_png(std::span<const std::uint8_t> bytes, DecodeOptions options = {});

}  // namespace qrefine
