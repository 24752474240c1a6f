#pragma once

#include <vector>

#include "qrefine/image.hpp"
#include "qrefine/quality_field.hpp"

namespace qrefine {

/// Normalized 1-D Gaussian taps for offsets -radius..radius.
std::vector<double> gaussian_kernel(double sigma, int radius);

/// Separable Gaussian blur with replicated borders. radius < 0 selects
/// ceil(3σ).
ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma, int radius = -1);

/// Prompt-free classical enhancer: a 3×3 Gaussian pre-smooth (σ=0.8)
/// followed by unsharp masking, out = clamp(S + (I − G_{1.5}(I))).
ImageBuffer builtin_blind_enhance(const ImageBuffer& img);

struct HarmonicOptions {
  int iterations = 2000;
  double omega = 1.8;
  double tolerance = 1e-4;
  /// Accept a fully masked image and relax it with free (reflecting)
  /// borders from its current values instead of raising kUnsolvable.
  bool allow_fully_masked = false;
};

struct HarmonicStats {
  int sweeps = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Fills masked pixels with the discrete harmonic interpolant of their
/// unmasked surroundings (each masked pixel equals the mean of its
/// in-bounds 4-neighbours), solved by successive over-relaxation until the
/// largest update residual drops below `tolerance` or the sweep budget is
/// spent. Unmasked pixels are never written. Throws kUnsolvable when no
/// pixel is unmasked (unless allow_fully_masked) or some masked component
/// touches no known pixel.
ImageBuffer builtin_harmonic_inpaint(const ImageBuffer& img, const InpaintMask& mask,
                                     HarmonicOptions options = {}, HarmonicStats* stats = nullptr);

}  // namespace qrefine
