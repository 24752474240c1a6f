#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qrefine/enhancer.hpp"
#include "qrefine/error.hpp"
#include "qrefine/image.hpp"
#include "qrefine/iqa.hpp"
#include "qrefine/quality_field.hpp"

namespace qrefine {

/// Which refining pipelines run: (1) noise injection, (2) mask inpainting,
/// (3) global enhancement.
struct StageSet {
  bool noise = true;
  bool inpaint = true;
  bool enhance = true;

  static StageSet all() { return {}; }
  /// Parses "1,2,3"-style lists. Throws kConfig on unknown or repeated ids
  /// or an empty list.
  static StageSet parse(std::string_view text);
  bool contains(int stage) const noexcept;
  bool empty() const noexcept { return !noise && !inpaint && !enhance; }
  /// Canonical "1,2,3" form.
  std::string to_string() const;

  friend bool operator==(const StageSet&, const StageSet&) = default;
};

struct RefineConfig {
  double b_lq = 0.35;
  double b_mq = 0.60;
  double b_hq = 0.75;
  double noise_mu = 0.5;
  double noise_sigma = 0.25;
  double inpaint_strength = 0.75;
  double enhance_strength = 0.30;
  int steps = 30;
  std::uint64_t seed = 0;
  StageSet stages_enabled;
  double min_mask_fraction = 0.005;
  std::vector<std::string> positive_words{"high quality", "sharp focus", "highly detailed"};
  ScorerConfig scorer;

  /// Throws kConfig when any invariant fails: 0 < b_lq < b_mq < b_hq < 1,
  /// stage 1 only together with stage 2, enhance_strength < inpaint_strength.
  void validate() const;
};

/// One executed (or skipped) stage.
struct StageRecord {
  int stage = 0;
  bool executed = false;
  std::string skip_reason;
  double mask_fraction = 0.0;
  double q_before = 0.0;
  double q_after = 0.0;
  std::string backend;
  double millis = 0.0;
};

/// Per-stage records for every enabled stage, in execution order.
struct StageReport {
  std::vector<StageRecord> stages;
  double q_initial = 0.0;
  double q_final = 0.0;
  bool complete = false;

  const StageRecord* find(int stage) const noexcept;
};

/// Thrown by run_pipeline; carries the report of the stages that ran.
class PipelineError : public Error {
 public:
  PipelineError(const Error& cause, StageReport partial);

  ErrorKind cause_kind() const noexcept { return kind(); }
  const StageReport& partial_report() const noexcept { return partial_; }

 private:
  StageReport partial_;
};

/// Seed for the per-image noise stream.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t image_index) noexcept;

/// I_s1 = W·G + (1 − W)·I, G ~ Normal(noise_mu, noise_sigma²) i.i.d. per
/// sample and clamped, drawn from mix_seed(cfg.seed, image_index). Returns
/// `img` untouched (and draws nothing) when W is identically zero.
ImageBuffer stage1_noise(const ImageBuffer& img, const NoiseWeightMap& weight, const RefineConfig& cfg,
                         std::uint64_t image_index = 0);

struct Stage2Result {
  ImageBuffer image;
  bool executed = false;
  std::string skip_reason;
  double mask_fraction = 0.0;
};

/// Delegates the masked region to `backend`, or skips when the mask covers
/// less than cfg.min_mask_fraction. Backend failures surface as kStage;
/// a result whose unmasked pixels moved by more than 1/255 is kIntegrity.
Stage2Result stage2_inpaint(const ImageBuffer& img, const InpaintMask& mask, std::string_view prompt,
                            const RefineConfig& cfg, const Enhancer& backend);

/// Appends each positive word not already contained (case-insensitive) in
/// the prompt, joined by ", ".
std::string augment_prompt(std::string_view prompt, const std::vector<std::string>& positive_words);

enum class EnhanceRoute { kBlind, kGuided };
std::string_view to_string(EnhanceRoute route);

/// q < b_hq selects the blind enhancer, anything else the guided one.
EnhanceRoute select_route(double q, double b_hq) noexcept;

struct Stage3Result {
  ImageBuffer image;
  EnhanceRoute route = EnhanceRoute::kBlind;
  double q = 0.0;
  std::string backend;
};

/// Re-scores the input with `scorer`, then applies `blind` (q < B_HQ) or
/// `guided` with the augmented prompt, enhance_strength, steps and seed.
Stage3Result stage3_enhance(const ImageBuffer& img, std::string_view prompt, const RefineConfig& cfg,
                            const Scorer& scorer, const Enhancer& blind, const Enhancer& guided);

struct PipelineOptions {
  /// Defaults to ClassicalScorer(cfg.scorer).
  const Scorer* scorer = nullptr;
  /// Defaults to the built-in BlindEnhancer.
  const Enhancer* blind = nullptr;
  std::uint64_t image_index = 0;
};

struct RefineResult {
  ImageBuffer image;
  StageReport report;
  QualityMap quality_map;
  FlattenedQualityMap flattened;
};

/// Scores once, derives W and the mask from the flattened map, then runs
/// the enabled stages in order 1 → 2 → 3, each consuming the previous
/// output. Throws PipelineError on the first failing stage.
RefineResult run_pipeline(const ImageBuffer& img, std::string_view prompt, const RefineConfig& cfg,
                          const Enhancer& backend, const PipelineOptions& options = {});

}  // namespace qrefine
