#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrefine/image.hpp"
#include "qrefine/quality_field.hpp"

namespace qrefine {

enum class DegradeOp { kGaussianBlur, kAdditiveNoise };

/// Axis-aligned region in relative coordinates, [x0,x1) × [y0,y1) ⊂ [0,1]².
struct DegradeRegion {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  DegradeOp op = DegradeOp::kGaussianBlur;
  double sigma = 2.0;  // blur σ in [1,4] px or noise σ in [0.05,0.2]
};

struct DegradeSpec {
  std::uint64_t seed = 0;
  std::vector<DegradeRegion> regions;

  /// Throws kSpec for an empty region list, out-of-bounds or inverted
  /// regions, or a σ outside its operation's range.
  void validate() const;
};

/// Text form: "seed=N" plus one "region=x0,y0,x1,y1,blur|noise,sigma" per
/// region; '#' comments.
DegradeSpec parse_degrade_spec(std::string_view text);
std::string format_degrade_spec(const DegradeSpec& spec);

/// 1-2 regions with sides in [0.35,0.55] and operations/σ drawn from the
/// permitted ranges.
DegradeSpec random_degrade_spec(std::uint64_t seed);

struct DegradedImage {
  ImageBuffer image;
  InpaintMask truth;  // 1 inside any degraded region
};

/// Applies the regions in order. Throws kSpec if the regions leave no
/// clean pixel.
DegradedImage apply_degradation(const ImageBuffer& clean, const DegradeSpec& spec);

struct CorpusImage {
  std::string id;
  ImageBuffer image;
  std::optional<InpaintMask> truth;
};

struct SyntheticSample {
  std::string id;
  ImageBuffer clean;
  DegradeSpec spec;
  DegradedImage degraded;
};

/// `count` synthetic clean images with random degradations, fully
/// determined by `seed`. Ids are img_000, img_001, ...
std::vector<SyntheticSample> build_synthetic_corpus(std::uint64_t seed, int count, int size = 256);

/// Writes <id>.png and <id>_mask.png (ground truth, 255 = degraded) for
/// each sample into `dir`, creating it if needed.
void write_corpus(const std::filesystem::path& dir, const std::vector<SyntheticSample>& samples);

/// Loads every *.png / *.jpg in `dir` except *_mask.png, sorted by file
/// name; a sibling <id>_mask.png becomes the ground-truth mask.
std::vector<CorpusImage> load_corpus(const std::filesystem::path& dir);

std::vector<CorpusImage> to_corpus(const std::vector<SyntheticSample>& samples);

}  // namespace qrefine
