#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "qrefine/codec.hpp"
#include "qrefine/config_file.hpp"
#include "qrefine/degrade.hpp"
#include "qrefine/enhancers.hpp"
#include "qrefine/error.hpp"
#include "qrefine/eval.hpp"
#include "qrefine/synthetic.hpp"
#include "test_support.hpp"

namespace {

using namespace qrefine;

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST(DegradeSpec, Validation) {
  auto expect_spec_error = [](const DegradeSpec& s) {
    try {
      s.validate();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kSpec);
    }
  };
  expect_spec_error(DegradeSpec{});
  expect_spec_error(DegradeSpec{1, {{0.5, 0.5, 1.2, 0.9, DegradeOp::kGaussianBlur, 2.0}}});
  expect_spec_error(DegradeSpec{1, {{0.5, 0.5, 0.4, 0.9, DegradeOp::kGaussianBlur, 2.0}}});
  expect_spec_error(DegradeSpec{1, {{0.1, 0.1, 0.4, 0.4, DegradeOp::kGaussianBlur, 5.0}}});
  expect_spec_error(DegradeSpec{1, {{0.1, 0.1, 0.4, 0.4, DegradeOp::kAdditiveNoise, 0.3}}});
  EXPECT_NO_THROW((DegradeSpec{1, {{0.1, 0.1, 0.4, 0.4, DegradeOp::kAdditiveNoise, 0.1}}}.validate()));
}

TEST(DegradeSpec, TextRoundTrip) {
  const DegradeSpec spec{77,
                         {{0.1, 0.2, 0.5, 0.6, DegradeOp::kGaussianBlur, 3.0},
                          {0.5, 0.5, 0.9, 0.8, DegradeOp::kAdditiveNoise, 0.125}}};
  const auto back = parse_degrade_spec(format_degrade_spec(spec));
  EXPECT_EQ(back.seed, 77u);
  ASSERT_EQ(back.regions.size(), 2u);
  EXPECT_EQ(back.regions[1].op, DegradeOp::kAdditiveNoise);
  EXPECT_DOUBLE_EQ(back.regions[0].y1, 0.6);
  EXPECT_EQ(format_degrade_spec(back), format_degrade_spec(spec));
  EXPECT_THROW(parse_degrade_spec("region=0,0,1\n"), Error);
  EXPECT_THROW(parse_degrade_spec("region=0,0,0.5,0.5,smear,2\n"), Error);
}

TEST(DegradeSpec, RandomSpecsAreValid) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto spec = random_degrade_spec(s);
    EXPECT_NO_THROW(spec.validate());
    EXPECT_GE(spec.regions.size(), 1u);
    EXPECT_LE(spec.regions.size(), 2u);
  }
}

TEST(Degrade, BlurRegionLowersScoreInside) {
  const auto clean = synthesize_clean(5, 128);
  const DegradeSpec spec{1, {{0.25, 0.25, 0.75, 0.75, DegradeOp::kGaussianBlur, 3.0}}};
  const auto d = apply_degradation(clean, spec);
  const ScorerConfig cfg;
  EXPECT_LT(region_cell_score(d.image, d.truth, cfg), region_cell_score(clean, d.truth, cfg));
  EXPECT_DOUBLE_EQ(mask_fraction(d.truth), 0.25);
}

TEST(Degrade, OnlyRegionPixelsChange) {
  const auto clean = synthesize_clean(6, 64);
  const DegradeSpec spec{3, {{0.5, 0.0, 1.0, 0.5, DegradeOp::kAdditiveNoise, 0.1}}};
  const auto d = apply_degradation(clean, spec);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (d.truth.at(y, x) == 0.0f) {
        for (int c = 0; c < 3; ++c) EXPECT_EQ(d.image.at(y, x, c), clean.at(y, x, c));
      }
}

TEST(Degrade, FullCoverageLeavesNoCleanPixel) {
  const DegradeSpec spec{1, {{0.0, 0.0, 1.0, 1.0, DegradeOp::kGaussianBlur, 2.0}}};
  EXPECT_THROW(apply_degradation(synthesize_clean(1, 32), spec), Error);
}

TEST(Synthetic, CleanImagesScoreHigh) {
  const ClassicalScorer scorer;
  for (std::uint64_t s = 0; s < 4; ++s) {
    const double q = global_quality(scorer.quality_map(synthesize_clean(s)));
    EXPECT_GT(q, 0.7);
    EXPECT_LT(q, 0.95);
  }
}

TEST(Corpus, FixedSeedGivesIdenticalBytes) {
  qtest::TempDir a("corpus_a"), b("corpus_b");
  write_corpus(a.path(), build_synthetic_corpus(9, 3, 64));
  write_corpus(b.path(), build_synthetic_corpus(9, 3, 64));
  for (const char* name : {"img_000.png", "img_001_mask.png", "img_002.png"}) {
    EXPECT_EQ(read_file(a / name), read_file(b / name)) << name;
  }
}

TEST(Corpus, LoadSortsAndAttachesMasks) {
  qtest::TempDir dir("corpus_load");
  const auto samples = build_synthetic_corpus(2, 3, 64);
  write_corpus(dir.path(), samples);
  write_file(dir / "aaa.png", encode_png(synthesize_clean(1, 32)));
  const auto corpus = load_corpus(dir.path());
  ASSERT_EQ(corpus.size(), 4u);
  EXPECT_EQ(corpus[0].id, "aaa");
  EXPECT_FALSE(corpus[0].truth.has_value());
  EXPECT_EQ(corpus[1].id, "img_000");
  ASSERT_TRUE(corpus[1].truth.has_value());
  EXPECT_EQ(*corpus[1].truth, samples[0].degraded.truth);
  EXPECT_THROW(load_corpus(dir / "missing"), Error);
}

class EvalFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { corpus_ = new std::vector<CorpusImage>(to_corpus(build_synthetic_corpus(5, 8, 96))); }
  static void TearDownTestSuite() { delete corpus_; }
  static std::vector<CorpusImage>* corpus_;
};
std::vector<CorpusImage>* EvalFixture::corpus_ = nullptr;

TEST_F(EvalFixture, RecordsInCorpusOrderRegardlessOfJobs) {
  const BuiltinBackend backend;
  const RefineConfig cfg;
  const auto serial = evaluate_corpus(*corpus_, cfg, backend, {.jobs = 1});
  const auto parallel = evaluate_corpus(*corpus_, cfg, backend, {.jobs = 4});
  ASSERT_EQ(serial.size(), 8u);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_EQ(serial[k].image_id, (*corpus_)[k].id);
    EXPECT_EQ(serial[k].config_hash, config_hash(cfg));
    EXPECT_TRUE(serial[k].has_truth);
  }
  EXPECT_EQ(eval_records_csv(serial), eval_records_csv(parallel));
  EXPECT_EQ(eval_stage_csv(serial, "builtin"), eval_stage_csv(parallel, "builtin"));
}

TEST_F(EvalFixture, CsvShapes) {
  const auto records = evaluate_corpus(*corpus_, RefineConfig{}, BuiltinBackend{});
  const auto stage_csv = eval_stage_csv(records, "builtin");
  EXPECT_EQ(stage_csv.rfind(std::string(kStageCsvHeader) + "\n", 0), 0u);
  EXPECT_EQ(count_lines(stage_csv), 1u + 8u * 3u + 1u);
  EXPECT_NE(stage_csv.find("\nsummary,all,8,"), std::string::npos);

  const auto rec_csv = eval_records_csv(records);
  EXPECT_EQ(count_lines(rec_csv), 1u + 8u + 1u);
  EXPECT_EQ(rec_csv.rfind("image_id,config_hash,q_before,q_after", 0), 0u);
  EXPECT_NE(rec_csv.find("\nmean,"), std::string::npos);

  const auto s = summarize(records);
  EXPECT_EQ(s.images, 8u);
  EXPECT_EQ(s.truth_images, 8u);
  double mean_before = 0.0;
  for (const auto& r : records) mean_before += r.q_before / 8.0;
  EXPECT_NEAR(s.q_before, mean_before, 1e-12);
}

TEST_F(EvalFixture, AblationReportsFiveValidCombinations) {
  const auto rows = run_ablation(*corpus_, RefineConfig{}, BuiltinBackend{});
  ASSERT_EQ(rows.size(), 6u);
  int valid = 0;
  for (const auto& r : rows) {
    if (r.valid) {
      ++valid;
      EXPECT_EQ(r.summary.images, 8u);
    } else {
      EXPECT_EQ(r.stages.to_string(), "1,3");
      EXPECT_FALSE(r.note.empty());
    }
  }
  EXPECT_EQ(valid, 5);
  const auto csv = ablation_csv(rows);
  EXPECT_EQ(count_lines(csv), 7u);
  EXPECT_NE(csv.find("\"1,3\",0,"), std::string::npos);
}

TEST(RegionScore, FallsBackToHalfCoveredCells) {
  const auto img = synthesize_clean(2, 64);
  PixelMap truth(64, 64);
  for (int y = 0; y < 64; ++y)
    truth.at(y, 0) = 1.0f;  // cells are 4 px wide: a quarter covered
  EXPECT_EQ(region_cell_score(img, truth, ScorerConfig{}), 0.0);
  for (int y = 0; y < 64; ++y) truth.at(y, 1) = 1.0f;
  const double half = region_cell_score(img, truth, ScorerConfig{});
  EXPECT_GT(half, 0.0);
  const auto cells = score_cells(img, ScorerConfig{});
  double first_column = 0.0;
  for (int i = 0; i < 16; ++i) first_column += cells.at(i, 0) / 16.0;
  EXPECT_NEAR(half, first_column, 1e-9);
}

}  // namespace
