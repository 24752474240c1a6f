#pragma once

#include "qrefine/enhancer.hpp"
#include "qrefine/filters.hpp"

namespace qrefine {

/// E_B: builtin_blind_enhance, prompt and strength ignored.
class BlindEnhancer final : public Enhancer {
 public:
  std::string label() const override { return "builtin-blind"; }
  Capabilities capabilities() const override { return {.blind = true}; }
  ImageBuffer enhance(const ImageBuffer& img, const EnhanceParams& params) const override;
};

/// Offline stand-in for a generative service.
///
/// inpaint: harmonic fill of the masked region, then a per-pixel blend
/// toward the fill by `strength` inside the mask. Unmasked pixels are
/// copied bit-for-bit.
/// enhance: blend toward builtin_blind_enhance by `strength`.
/// Both honour the zero-strength echo rule; prompts are accepted and unused.
class BuiltinBackend final : public Enhancer {
 public:
  explicit BuiltinBackend(HarmonicOptions harmonic = {}) : harmonic_(harmonic) {}

  std::string label() const override { return "builtin"; }
  Capabilities capabilities() const override { return {.prompt_guided = true, .inpaint = true}; }
  ImageBuffer enhance(const ImageBuffer& img, const EnhanceParams& params) const override;
  ImageBuffer inpaint(const ImageBuffer& img, const InpaintMask& mask,
                      const InpaintParams& params) const override;

 private:
  HarmonicOptions harmonic_;
};

}  // namespace qrefine
