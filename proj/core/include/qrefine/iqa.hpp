#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qrefine/codec.hpp"
#include "qrefine/image.hpp"

namespace qrefine {

/// Half-open pixel rectangle [row0,row1) × [col0,col1).
struct PatchRect {
  int row0 = 0;
  int row1 = 0;
  int col0 = 0;
  int col1 = 0;

  int height() const noexcept { return row1 - row0; }
  int width() const noexcept { return col1 - col0; }
  friend bool operator==(const PatchRect&, const PatchRect&) = default;
};

/// Floor-rule tiling: patch (i,j) spans rows [⌊i·h/n⌋, ⌊(i+1)·h/n⌋) and
/// the matching columns. Returned row-major, n*n entries. Throws kSize
/// when n exceeds min(h,w) or is below 1.
std::vector<PatchRect> split_patches(int height, int width, int n);

struct ScorerConfig {
  int n = 8;                     // patches per side of the quality map
  int cells_per_patch_side = 2;  // sub-cells pooled into each patch
  double tau_s = 2e-3;           // sharpness half-saturation
  double tau_n = 2e-2;           // noise half-saturation

  int cells_per_side() const noexcept { return n * cells_per_patch_side; }
  /// Throws kConfig on non-positive constants or n < 2.
  void validate() const;
};

/// Intermediate terms of the classical cell score.
struct CellStats {
  double laplacian_variance = 0.0;
  double sharpness = 0.0;    // s = Var(Δ) / (Var(Δ) + tau_s)
  double noise_sigma = 0.0;  // Immerkær σ_n
  double noise_penalty = 0.0;  // p = σ_n / (σ_n + tau_n)
  double score = 0.0;          // s · (1 − p)
};

/// Classical no-reference cell score over a luma block of at least 3×3.
/// Sharpness is the variance of the 4-neighbour Laplacian over the block
/// interior, the noise level is Immerkær's estimate; both saturate through
/// their half-saturation constants. Throws kSize for blocks under 3×3.
CellStats cell_stats(const PixelMap& luma_cell, double tau_s, double tau_n);
double cell_score(const PixelMap& luma_cell, double tau_s, double tau_n);

/// m×m grid of per-cell values, m = n · cells_per_patch_side.
class CellGrid {
 public:
  CellGrid() = default;
  CellGrid(int side, std::vector<float> values);

  int side() const noexcept { return side_; }
  float at(int i, int j) const noexcept { return values_[static_cast<std::size_t>(i * side_ + j)]; }
  const std::vector<float>& values() const noexcept { return values_; }
  double mean() const noexcept;

 private:
  int side_ = 0;
  std::vector<float> values_;
};

/// Per-cell score plus the sharpness and noise terms that produced it.
struct CellAnalysis {
  CellGrid score;
  CellGrid sharpness;
  CellGrid noise_sigma;
};

CellAnalysis analyze_cells(const ImageBuffer& img, const ScorerConfig& cfg);
CellGrid score_cells(const ImageBuffer& img, const ScorerConfig& cfg);

/// n×n patch quality map, scores in [0,1].
class QualityMap {
 public:
  QualityMap() = default;
  /// Throws kConfig when n < 2 or any score leaves [0,1].
  QualityMap(int n, std::vector<float> scores);

  int n() const noexcept { return n_; }
  float at(int i, int j) const noexcept { return scores_[static_cast<std::size_t>(i * n_ + j)]; }
  const std::vector<float>& scores() const noexcept { return scores_; }

  friend bool operator==(const QualityMap&, const QualityMap&) = default;

 private:
  int n_ = 0;
  std::vector<float> scores_;
};

/// Patch score = max over its cells_per_patch_side² cells.
QualityMap pool_patches(const CellGrid& cells, const ScorerConfig& cfg);

/// Arithmetic mean of every patch score.
double global_quality(const QualityMap& map);

/// Plug-in quality scorer. Implementations must return scores in [0,1],
/// be deterministic and pure. Every scorer in this library is immutable
/// after construction, so one instance can be shared across threads.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string label() const = 0;
  virtual QualityMap quality_map(const ImageBuffer& img) const = 0;
};

/// Default scorer: analyze_cells → pool_patches.
class ClassicalScorer final : public Scorer {
 public:
  explicit ClassicalScorer(ScorerConfig cfg = {});

  std::string label() const override { return "classical"; }
  QualityMap quality_map(const ImageBuffer& img) const override;
  const ScorerConfig& config() const noexcept { return cfg_; }

 private:
  ScorerConfig cfg_;
};

/// One row per line, space-separated fixed-point decimals (6 places).
std::string format_grid(const QualityMap& map);
QualityMap parse_grid(std::string_view text);

/// n×n grayscale PNG, 0 = quality 0, 255 = quality 1.
Bytes quality_heatmap_png(const QualityMap& map);

}  // namespace qrefine
