#include "qrefine/stages.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "qrefine/enhancers.hpp"

namespace qrefine {
namespace {

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::kConfig, message);
}

}  // namespace

// ---- StageSet ------------------------------------------------------------

StageSet StageSet::parse(std::string_view text) {
  StageSet out{false, false, false};
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view token =
        trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    bool* slot = nullptr;
    if (token == "1") slot = &out.noise;
    if (token == "2") slot = &out.inpaint;
    if (token == "3") slot = &out.enhance;
    if (slot == nullptr) throw Error(ErrorKind::kConfig, "unknown stage '" + std::string(token) + "'");
    if (*slot) throw Error(ErrorKind::kConfig, "stage " + std::string(token) + " listed twice");
    *slot = true;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool StageSet::contains(int stage) const noexcept {
  switch (stage) {
    case 1: return noise;
    case 2: return inpaint;
    case 3: return enhance;
    default: return false;
  }
}

std::string StageSet::to_string() const {
  std::string out;
  for (int s = 1; s <= 3; ++s) {
    if (!contains(s)) continue;
    if (!out.empty()) out += ',';
    out += static_cast<char>('0' + s);
  }
  return out;
}

// ---- RefineConfig --------------------------------------------------------

void RefineConfig::validate() const {
  require(b_lq > 0.0 && b_hq < 1.0, "thresholds must lie in (0,1)");
  require(b_lq < b_mq && b_mq < b_hq, "thresholds must satisfy b_lq < b_mq < b_hq");
  require(noise_mu >= 0.0 && noise_mu <= 1.0, "noise_mu must lie in [0,1]");
  require(noise_sigma > 0.0, "noise_sigma must be positive");
  require(inpaint_strength >= 0.0 && inpaint_strength <= 1.0, "inpaint_strength must lie in [0,1]");
  require(enhance_strength >= 0.0 && enhance_strength <= 1.0, "enhance_strength must lie in [0,1]");
  require(enhance_strength < inpaint_strength, "enhance_strength must be below inpaint_strength");
  require(steps > 0, "steps must be positive");
  require(min_mask_fraction >= 0.0 && min_mask_fraction <= 1.0, "min_mask_fraction must lie in [0,1]");
  require(!stages_enabled.empty(), "at least one stage must be enabled");
  require(!stages_enabled.noise || stages_enabled.inpaint,
          "stage 1 cannot run without stage 2 (stages " + stages_enabled.to_string() + ")");
  scorer.validate();
}

// ---- StageReport ---------------------------------------------------------

const StageRecord* StageReport::find(int stage) const noexcept {
  for (const auto& r : stages) {
    if (r.stage == stage) return &r;
  }
  return nullptr;
}

PipelineError::PipelineError(const Error& cause, StageReport partial)
    : Error(cause.kind(), cause.what()), partial_(std::move(partial)) {}

// ---- Stage 1 -------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t image_index) noexcept {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (image_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ImageBuffer stage1_noise(const ImageBuffer& img, const NoiseWeightMap& weight, const RefineConfig& cfg,
                         std::uint64_t image_index) {
  if (!weight.same_shape(img)) throw Error(ErrorKind::kShape, "noise weight map differs from image shape");
  const auto w = weight.values();
  if (std::all_of(w.begin(), w.end(), [](float v) { return v == 0.0f; })) return img;

  std::mt19937_64 rng(mix_seed(cfg.seed, image_index));
  std::normal_distribution<double> normal(cfg.noise_mu, cfg.noise_sigma);
  std::vector<float> noise(img.samples().size());
  for (float& v : noise) v = static_cast<float>(normal(rng));
  return blend(img, ImageBuffer(img.height(), img.width(), std::move(noise)), weight);
}

// ---- Stage 2 -------------------------------------------------------------

Stage2Result stage2_inpaint(const ImageBuffer& img, const InpaintMask& mask, std::string_view prompt,
                            const RefineConfig& cfg, const Enhancer& backend) {
  if (!mask.same_shape(img)) throw Error(ErrorKind::kShape, "mask differs from image shape");
  Stage2Result out{img, false, {}, mask_fraction(mask)};
  if (out.mask_fraction == 0.0) {
    out.skip_reason = "empty_mask";
    return out;
  }
  if (out.mask_fraction < cfg.min_mask_fraction) {
    out.skip_reason = "mask_below_min";
    return out;
  }
  if (!backend.capabilities().inpaint) {
    throw Error(ErrorKind::kStage, "backend " + backend.label() + " cannot inpaint");
  }

  InpaintParams params;
  params.prompt = std::string(prompt);
  params.strength = cfg.inpaint_strength;
  params.steps = cfg.steps;
  params.seed = cfg.seed;
  ImageBuffer result;
  try {
    result = backend.inpaint(img, mask, params);
  } catch (const Error& e) {
    throw Error(ErrorKind::kStage, "inpaint via " + backend.label() + " failed: " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kStage, "inpaint via " + backend.label() + " failed: " + e.what());
  }
  if (!result.same_shape(img)) {
    throw Error(ErrorKind::kIntegrity, "inpaint result has the wrong dimensions");
  }
  const float tolerance = 1.0f / 255.0f + 1e-6f;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (mask.at(y, x) != 0.0f) continue;
      for (int c = 0; c < 3; ++c) {
        if (std::abs(result.at(y, x, c) - img.at(y, x, c)) > tolerance) {
          throw Error(ErrorKind::kIntegrity, "backend " + backend.label() + " changed unmasked pixel (" +
                                                 std::to_string(y) + "," + std::to_string(x) + ")");
        }
      }
    }
  }
  out.image = std::move(result);
  out.executed = true;
  return out;
}

// ---- Stage 3 -------------------------------------------------------------

std::string augment_prompt(std::string_view prompt, const std::vector<std::string>& positive_words) {
  std::string out(trim(prompt));
  std::string haystack = lower(out);
  for (const auto& word : positive_words) {
    const std::string needle = lower(word);
    if (needle.empty() || haystack.find(needle) != std::string::npos) continue;
    if (!out.empty()) out += ", ";
    out += word;
    haystack = lower(out);
  }
  return out;
}

std::string_view to_string(EnhanceRoute route) {
  return route == EnhanceRoute::kBlind ? "blind" : "guided";
}

EnhanceRoute select_route(double q, double b_hq) noexcept {
  return q < b_hq ? EnhanceRoute::kBlind : EnhanceRoute::kGuided;
}

Stage3Result stage3_enhance(const ImageBuffer& img, std::string_view prompt, const RefineConfig& cfg,
                            const Scorer& scorer, const Enhancer& blind, const Enhancer& guided) {
  Stage3Result out;
  out.q = global_quality(scorer.quality_map(img));
  out.route = select_route(out.q, cfg.b_hq);
  const Enhancer& chosen = out.route == EnhanceRoute::kBlind ? blind : guided;
  out.backend = chosen.label();

  EnhanceParams params;
  params.steps = cfg.steps;
  params.seed = cfg.seed;
  if (out.route == EnhanceRoute::kGuided) {
    params.prompt = augment_prompt(prompt, cfg.positive_words);
    params.strength = cfg.enhance_strength;
  } else {
    params.prompt = std::string(prompt);
    params.strength = 1.0;
  }
  try {
    out.image = chosen.enhance(img, params);
  } catch (const Error& e) {
    throw Error(ErrorKind::kStage, "enhance via " + chosen.label() + " failed: " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kStage, "enhance via " + chosen.label() + " failed: " + e.what());
  }
  if (!out.image.same_shape(img)) throw Error(ErrorKind::kIntegrity, "enhancer changed the image dimensions");
  return out;
}

// ---- Orchestrator --------------------------------------------------------

RefineResult run_pipeline(const ImageBuffer& img, std::string_view prompt, const RefineConfig& cfg,
                          const Enhancer& backend, const PipelineOptions& options) {
  cfg.validate();
  if (img.height() < ImageBuffer::kMinRefinableSide || img.width() < ImageBuffer::kMinRefinableSide) {
    throw Error(ErrorKind::kSize, "image is below the 8x8 refinable minimum");
  }
  std::optional<ClassicalScorer> default_scorer;
  const Scorer* scorer = options.scorer;
  if (scorer == nullptr) scorer = &default_scorer.emplace(cfg.scorer);
  const BlindEnhancer default_blind;
  const Enhancer& blind = options.blind != nullptr ? *options.blind : default_blind;

  RefineResult result;
  StageReport& report = result.report;
  result.quality_map = scorer->quality_map(img);
  report.q_initial = global_quality(result.quality_map);
  result.flattened = flatten_bicubic(result.quality_map, img.height(), img.width());

  ImageBuffer current = img;
  double q_current = report.q_initial;
  int active = 0;
  try {
    if (cfg.stages_enabled.noise) {
      active = 1;
      const auto start = Clock::now();
      StageRecord rec;
      rec.stage = 1;
      rec.q_before = q_current;
      rec.backend = "builtin-noise";
      const NoiseWeightMap weight = noise_weight(result.flattened, cfg.b_lq);
      const auto w = weight.values();
      rec.mask_fraction = static_cast<double>(std::count_if(w.begin(), w.end(), [](float v) { return v > 0.0f; })) /
                          static_cast<double>(w.size());
      if (rec.mask_fraction == 0.0) {
        rec.skip_reason = "no_lq_region";
        rec.q_after = q_current;
      } else {
        current = stage1_noise(current, weight, cfg, options.image_index);
        rec.executed = true;
        q_current = global_quality(scorer->quality_map(current));
        rec.q_after = q_current;
      }
      rec.millis = millis_since(start);
      report.stages.push_back(rec);
    }
    if (cfg.stages_enabled.inpaint) {
      active = 2;
      const auto start = Clock::now();
      const InpaintMask mask = make_mask(result.flattened, cfg.b_mq);
      Stage2Result s2 = stage2_inpaint(current, mask, prompt, cfg, backend);
      StageRecord rec{.stage = 2, .executed = s2.executed, .skip_reason = s2.skip_reason,
                      .mask_fraction = s2.mask_fraction, .q_before = q_current, .backend = backend.label()};
      if (s2.executed) {
        current = std::move(s2.image);
        q_current = global_quality(scorer->quality_map(current));
      }
      rec.q_after = q_current;
      rec.millis = millis_since(start);
      report.stages.push_back(rec);
    }
    if (cfg.stages_enabled.enhance) {
      active = 3;
      const auto start = Clock::now();
      Stage3Result s3 = stage3_enhance(current, prompt, cfg, *scorer, blind, backend);
      StageRecord rec;
      rec.stage = 3;
      rec.executed = true;
      rec.q_before = s3.q;
      rec.backend = s3.backend;
      current = std::move(s3.image);
      q_current = global_quality(scorer->quality_map(current));
      rec.q_after = q_current;
      rec.millis = millis_since(start);
      report.stages.push_back(rec);
    }
  } catch (const Error& e) {
    report.q_final = q_current;
    throw PipelineError(Error(e.kind(), "stage " + std::to_string(active) + ": " + e.what()), report);
  }
  report.q_final = q_current;
  report.complete = true;
  result.image = std::move(current);
  return result;
}

}  // namespace qrefine
