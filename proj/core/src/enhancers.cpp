#include "qrefine/enhancers.hpp"

#include "qrefine/error.hpp"

namespace qrefine {
namespace {

void check_strength(double strength) {
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw Error(ErrorKind::kValidation, "strength must lie in [0,1]");
  }
}

}  // namespace

ImageBuffer Enhancer::enhance(const ImageBuffer&, const EnhanceParams&) const {
  throw Error(ErrorKind::kStage, label() + " does not implement enhance");
}

ImageBuffer Enhancer::inpaint(const ImageBuffer&, const InpaintMask&, const InpaintParams&) const {
  throw Error(ErrorKind::kStage, label() + " does not implement inpaint");
}

ImageBuffer BlindEnhancer::enhance(const ImageBuffer& img, const EnhanceParams&) const {
  return builtin_blind_enhance(img);
}

ImageBuffer BuiltinBackend::enhance(const ImageBuffer& img, const EnhanceParams& params) const {
  check_strength(params.strength);
  if (params.strength == 0.0) return img;
  const PixelMap weight(img.height(), img.width(), static_cast<float>(params.strength));
  return blend(img, builtin_blind_enhance(img), weight);
}

ImageBuffer BuiltinBackend::inpaint(const ImageBuffer& img, const InpaintMask& mask,
                                    const InpaintParams& params) const {
  check_strength(params.strength);
  if (!mask.same_shape(img)) throw Error(ErrorKind::kShape, "mask and image differ in shape");
  if (params.strength == 0.0 || mask_fraction(mask) == 0.0) return img;
  HarmonicOptions options = harmonic_;
  options.allow_fully_masked = true;
  const ImageBuffer filled = builtin_harmonic_inpaint(img, mask, options);
  PixelMap weight = mask;
  for (float& v : weight.values()) v *= static_cast<float>(params.strength);
  return blend(img, filled, weight);
}

}  // namespace qrefine
