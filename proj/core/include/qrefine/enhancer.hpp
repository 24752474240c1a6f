#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qrefine/image.hpp"
#include "qrefine/quality_field.hpp"

namespace qrefine {

struct Capabilities {
  bool blind = false;          // ignores the prompt
  bool prompt_guided = false;  // enhance() honours the prompt
  bool inpaint = false;        // implements inpaint()
};

struct InpaintParams {
  std::string prompt;
  std::optional<std::string> negative_prompt;
  double strength = 0.75;
  int steps = 30;
  std::uint64_t seed = 0;
};

struct EnhanceParams {
  std::string prompt;
  double strength = 0.30;
  int steps = 30;
  std::uint64_t seed = 0;
};

/// Generative or classical refinement backend. In-process and remote
/// implementations share this interface and the ErrorKind taxonomy.
/// Implementations are deterministic given (input, parameters, seed), and
/// must be safe to call concurrently from several pipeline runs.
class Enhancer {
 public:
  virtual ~Enhancer() = default;

  virtual std::string label() const = 0;
  virtual Capabilities capabilities() const = 0;

  /// Whole-image enhancement. Strength 0 must echo the input.
  virtual ImageBuffer enhance(const ImageBuffer& img, const EnhanceParams& params) const;
  /// Regenerates pixels where mask = 1. Strength 0 must echo the input.
  virtual ImageBuffer inpaint(const ImageBuffer& img, const InpaintMask& mask,
                              const InpaintParams& params) const;
};

}  // namespace qrefine
