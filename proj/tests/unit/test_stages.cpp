#include <gtest/gtest.h>

#include <cmath>

#include "qrefine/codec.hpp"
#include "qrefine/enhancers.hpp"
#include "qrefine/error.hpp"
#include "qrefine/stages.hpp"
#include "qrefine/synthetic.hpp"
#include "test_support.hpp"

namespace {

using namespace qrefine;

QualityMap uniform_map(int n, float v) { return QualityMap(n, std::vector<float>(static_cast<std::size_t>(n * n), v)); }

class ThrowingBackend final : public Enhancer {
 public:
  std::string label() const override { return "throwing"; }
  Capabilities capabilities() const override { return {.prompt_guided = true, .inpaint = true}; }
  ImageBuffer inpaint(const ImageBuffer&, const InpaintMask&, const InpaintParams&) const override {
    throw Error(ErrorKind::kBackend, "model exploded");
  }
};

// Violates the preservation contract by brightening every pixel.
class RogueBackend final : public Enhancer {
 public:
  std::string label() const override { return "rogue"; }
  Capabilities capabilities() const override { return {.inpaint = true}; }
  ImageBuffer inpaint(const ImageBuffer& img, const InpaintMask&, const InpaintParams&) const override {
    ImageBuffer out = img;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) out.set(y, x, 0, img.at(y, x, 0) * 0.5f + 0.3f);
    return out;
  }
};

class BlindOnly final : public Enhancer {
 public:
  std::string label() const override { return "blind-only"; }
  Capabilities capabilities() const override { return {.blind = true}; }
};

TEST(StageSet, ParseAndFormat) {
  EXPECT_EQ(StageSet::parse("1,2,3"), StageSet::all());
  const auto s = StageSet::parse(" 3 , 2 ");
  EXPECT_FALSE(s.noise);
  EXPECT_TRUE(s.inpaint);
  EXPECT_TRUE(s.contains(3));
  EXPECT_EQ(s.to_string(), "2,3");
  EXPECT_THROW(StageSet::parse(""), Error);
  EXPECT_THROW(StageSet::parse("1,1"), Error);
  EXPECT_THROW(StageSet::parse("4"), Error);
}

TEST(RefineConfig, Invariants) {
  EXPECT_NO_THROW(RefineConfig{}.validate());
  RefineConfig c;
  c.b_mq = 0.3;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.stages_enabled = StageSet::parse("1,3");
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
  c = {};
  c.enhance_strength = 0.8;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.b_hq = 1.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(MixSeed, SeparatesImagesAndSeeds) {
  EXPECT_NE(mix_seed(7, 0), mix_seed(7, 1));
  EXPECT_NE(mix_seed(7, 0), mix_seed(8, 0));
  EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
}

TEST(Stage1, ZeroWeightIsIdentity) {
  const auto img = qtest::random_image(16, 16, 1);
  EXPECT_TRUE(qtest::bit_identical(stage1_noise(img, PixelMap(16, 16), RefineConfig{}), img));
}

TEST(Stage1, UnitWeightGivesNoiseSample) {
  const RefineConfig cfg;
  const auto a = stage1_noise(qtest::random_image(16, 16, 1), PixelMap(16, 16, 1.0f), cfg, 4);
  const auto b = stage1_noise(qtest::random_image(16, 16, 2), PixelMap(16, 16, 1.0f), cfg, 4);
  EXPECT_TRUE(qtest::bit_identical(a, b));  // output is G, independent of I

  PixelMap single(16, 16);
  single.at(5, 9) = 1.0f;
  const auto c = stage1_noise(qtest::random_image(16, 16, 3), single, cfg, 4);
  for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(c.at(5, 9, ch), a.at(5, 9, ch));
}

TEST(Stage1, HalfWeightVarianceMatchesMonteCarlo) {
  RefineConfig cfg;
  cfg.seed = 99;
  const auto img = qtest::constant_image(128, 128, 0.5f, 0.5f, 0.5f);
  const auto out = stage1_noise(img, PixelMap(128, 128, 0.5f), cfg);
  const double expected = 0.25 * cfg.noise_sigma * cfg.noise_sigma;
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0, sq = 0.0;
    const double n = 128.0 * 128.0;
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 128; ++x) {
        sum += out.at(y, x, c);
        sq += out.at(y, x, c) * out.at(y, x, c);
      }
    const double var = sq / n - (sum / n) * (sum / n);
    EXPECT_NEAR(var, expected, 0.2 * expected) << "channel " << c;
  }
}

TEST(Stage1, SeededAndShapeChecked) {
  RefineConfig cfg;
  cfg.seed = 5;
  const auto img = qtest::random_image(16, 16, 1);
  const PixelMap w(16, 16, 0.2f);
  EXPECT_EQ(stage1_noise(img, w, cfg), stage1_noise(img, w, cfg));
  RefineConfig other = cfg;
  other.seed = 6;
  EXPECT_NE(stage1_noise(img, w, cfg), stage1_noise(img, w, other));
  EXPECT_THROW(stage1_noise(img, PixelMap(16, 15), cfg), Error);
}

TEST(Stage2, EmptyMaskSkipsWithoutBackendCall) {
  qtest::CountingBackend backend;
  const auto img = qtest::random_image(16, 16, 1);
  const auto r = stage2_inpaint(img, PixelMap(16, 16), "p", RefineConfig{}, backend);
  EXPECT_FALSE(r.executed);
  EXPECT_EQ(r.skip_reason, "empty_mask");
  EXPECT_TRUE(qtest::bit_identical(r.image, img));
  EXPECT_EQ(backend.inpaint_calls, 0);
}

TEST(Stage2, TinyMaskBelowMinimumIsSkipped) {
  qtest::CountingBackend backend;
  PixelMap mask(32, 32);
  mask.at(3, 3) = 1.0f;  // 1/1024 < 0.5%
  const auto r = stage2_inpaint(qtest::random_image(32, 32, 1), mask, "p", RefineConfig{}, backend);
  EXPECT_EQ(r.skip_reason, "mask_below_min");
  EXPECT_EQ(backend.inpaint_calls, 0);
}

TEST(Stage2, FullMaskOnConstantImageStaysConstant) {
  const auto img = qtest::constant_image(16, 16, 0.25f, 0.5f, 0.75f);
  RefineConfig cfg;
  cfg.inpaint_strength = 1.0;
  cfg.enhance_strength = 0.3;
  const auto r = stage2_inpaint(img, PixelMap(16, 16, 1.0f), "p", cfg, BuiltinBackend{});
  EXPECT_TRUE(r.executed);
  EXPECT_LE(max_abs_diff(r.image, img), 1e-6f);
}

TEST(Stage2, HalfMaskedPreservesUnmaskedHalfExactly) {
  const auto img = synthesize_clean(3, 64);
  PixelMap mask(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 32; ++x) mask.at(y, x) = 1.0f;
  const auto r = stage2_inpaint(img, mask, "p", RefineConfig{}, BuiltinBackend{});
  ASSERT_TRUE(r.executed);
  for (int y = 0; y < 64; ++y)
    for (int x = 32; x < 64; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(r.image.at(y, x, c), img.at(y, x, c));
  EXPECT_GT(max_abs_diff(r.image, img), 0.0f);
}

TEST(Stage2, BackendFailureIsStageError) {
  try {
    stage2_inpaint(qtest::random_image(16, 16, 1), PixelMap(16, 16, 1.0f), "p", RefineConfig{}, ThrowingBackend{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kStage);
    EXPECT_NE(std::string(e.what()).find("model exploded"), std::string::npos);
  }
  EXPECT_THROW(stage2_inpaint(qtest::random_image(16, 16, 1), PixelMap(16, 16, 1.0f), "p", RefineConfig{},
                              BlindOnly{}),
               Error);
}

TEST(Stage2, ContractViolationIsIntegrityError) {
  PixelMap mask(16, 16);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 16; ++x) mask.at(y, x) = 1.0f;
  try {
    stage2_inpaint(qtest::constant_image(16, 16, 0.2f, 0.2f, 0.2f), mask, "p", RefineConfig{}, RogueBackend{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIntegrity);
  }
}

TEST(AugmentPrompt, Examples) {
  const RefineConfig cfg;
  EXPECT_EQ(augment_prompt("a cat", cfg.positive_words), "a cat, high quality, sharp focus, highly detailed");
  EXPECT_EQ(augment_prompt("", cfg.positive_words), "high quality, sharp focus, highly detailed");
  EXPECT_EQ(augment_prompt("a Sharp Focus photo", cfg.positive_words),
            "a Sharp Focus photo, high quality, highly detailed");
}

TEST(Routing, StrictBoundary) {
  EXPECT_EQ(select_route(0.5, 0.75), EnhanceRoute::kBlind);
  EXPECT_EQ(select_route(0.9, 0.75), EnhanceRoute::kGuided);
  EXPECT_EQ(select_route(0.75, 0.75), EnhanceRoute::kGuided);
}

TEST(Stage3, RoutesOnRescoredQuality) {
  const qtest::TaggingEnhancer blind("tag-blind", 0.1f, true);
  const qtest::TaggingEnhancer guided("tag-guided", 0.9f, false);
  const RefineConfig cfg;
  const auto img = qtest::random_image(16, 16, 1);

  auto low = stage3_enhance(img, "a cat", cfg, qtest::FixedScorer(uniform_map(2, 0.5f)), blind, guided);
  EXPECT_EQ(low.route, EnhanceRoute::kBlind);
  EXPECT_EQ(low.backend, "tag-blind");
  EXPECT_EQ(low.image.at(0, 0, 0), 0.1f);

  auto high = stage3_enhance(img, "a cat", cfg, qtest::FixedScorer(uniform_map(2, 0.9f)), blind, guided);
  EXPECT_EQ(high.route, EnhanceRoute::kGuided);
  EXPECT_EQ(guided.last_prompt, "a cat, high quality, sharp focus, highly detailed");
  EXPECT_DOUBLE_EQ(guided.last_strength, cfg.enhance_strength);

  auto edge = stage3_enhance(img, "a cat", cfg, qtest::FixedScorer(uniform_map(2, 0.75f)), blind, guided);
  EXPECT_EQ(edge.route, EnhanceRoute::kGuided);
}

TEST(Pipeline, InpaintOnlyOnHighQualityImageIsIdentity) {
  RefineConfig cfg;
  cfg.stages_enabled = StageSet::parse("2");
  qtest::CountingBackend backend;
  const qtest::FixedScorer scorer(uniform_map(8, 0.8f));
  const auto img = qtest::random_image(64, 64, 2);
  const auto r = run_pipeline(img, "p", cfg, backend, {.scorer = &scorer});
  EXPECT_TRUE(qtest::bit_identical(r.image, img));
  EXPECT_EQ(backend.inpaint_calls, 0);
  ASSERT_EQ(r.report.stages.size(), 1u);
  EXPECT_EQ(r.report.stages[0].skip_reason, "empty_mask");
}

TEST(Pipeline, HighQualityInputOnlyTouchedByGuidedEnhancer) {
  const RefineConfig cfg;
  const BuiltinBackend backend;
  const qtest::FixedScorer scorer(uniform_map(8, 0.9f));
  const auto img = synthesize_clean(11, 64);
  const auto r = run_pipeline(img, "a cat", cfg, backend, {.scorer = &scorer});
  EnhanceParams params;
  params.prompt = augment_prompt("a cat", cfg.positive_words);
  params.strength = cfg.enhance_strength;
  params.steps = cfg.steps;
  params.seed = cfg.seed;
  EXPECT_TRUE(qtest::bit_identical(r.image, backend.enhance(img, params)));
  EXPECT_FALSE(r.report.find(1)->executed);
  EXPECT_FALSE(r.report.find(2)->executed);
  EXPECT_EQ(r.report.find(3)->backend, "builtin");
}

TEST(Pipeline, AblationVariantsDiffer) {
  const auto img = synthesize_clean(4, 128);
  auto degraded = img;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c) degraded.set(y, x, c, 0.5f);
  const BuiltinBackend backend;
  std::vector<ImageBuffer> outs;
  for (const char* s : {"1,2,3", "2,3", "3"}) {
    RefineConfig cfg;
    cfg.stages_enabled = StageSet::parse(s);
    const auto r = run_pipeline(degraded, "p", cfg, backend);
    EXPECT_TRUE(r.report.complete);
    EXPECT_EQ(r.report.stages.size(), std::string(s).size() / 2 + 1);
    for (const auto& rec : r.report.stages) EXPECT_TRUE(rec.executed) << s << " stage " << rec.stage;
    outs.push_back(r.image);
  }
  EXPECT_NE(outs[0], outs[1]);
  EXPECT_NE(outs[1], outs[2]);
  EXPECT_NE(outs[0], outs[2]);
}

TEST(Pipeline, DeterministicForFixedInputs) {
  const auto img = synthesize_clean(8, 96);
  RefineConfig cfg;
  cfg.seed = 7;
  const BuiltinBackend backend;
  EXPECT_EQ(encode_png(run_pipeline(img, "p", cfg, backend).image), encode_png(run_pipeline(img, "p", cfg, backend).image));
}

TEST(Pipeline, FailureCarriesPartialReport) {
  const qtest::FixedScorer scorer(uniform_map(8, 0.1f));
  try {
    run_pipeline(qtest::random_image(64, 64, 1), "p", RefineConfig{}, ThrowingBackend{}, {.scorer = &scorer});
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.cause_kind(), ErrorKind::kStage);
    EXPECT_FALSE(e.partial_report().complete);
    ASSERT_EQ(e.partial_report().stages.size(), 1u);
    EXPECT_TRUE(e.partial_report().stages[0].executed);
  }
}

TEST(Pipeline, RejectsTinyImagesAndBadConfig) {
  EXPECT_THROW(run_pipeline(ImageBuffer(4, 4), "p", RefineConfig{}, BuiltinBackend{}), Error);
  RefineConfig bad;
  bad.stages_enabled = StageSet::parse("1,3");
  EXPECT_THROW(run_pipeline(ImageBuffer(16, 16), "p", bad, BuiltinBackend{}), Error);
}

TEST(BuiltinBackend, ZeroStrengthEchoAndValidation) {
  const BuiltinBackend b;
  const auto img = qtest::random_image(16, 16, 2);
  EXPECT_TRUE(qtest::bit_identical(b.enhance(img, EnhanceParams{.strength = 0.0}), img));
  EXPECT_TRUE(qtest::bit_identical(b.inpaint(img, PixelMap(16, 16, 1.0f), InpaintParams{.strength = 0.0}), img));
  EXPECT_THROW(b.enhance(img, EnhanceParams{.strength = 1.5}), Error);
  EXPECT_THROW(b.inpaint(img, PixelMap(16, 16), InpaintParams{.strength = -0.1}), Error);
}

}  // namespace
