#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qrefine/error.hpp"
#include "qrefine/image.hpp"
#include "test_support.hpp"

namespace {

using qrefine::blend;
using qrefine::Error;
using qrefine::ErrorKind;
using qrefine::ImageBuffer;
using qrefine::PixelMap;
using qrefine::to_luma;

TEST(ImageBuffer, ClampsOnConstructionAndSet) {
  ImageBuffer img(2, 2, std::vector<float>{-1.0f, 0.5f, 2.0f, 0, 0, 0, 0, 0, 0, 0, 0, NAN});
  EXPECT_EQ(img.at(0, 0, 0), 0.0f);
  EXPECT_EQ(img.at(0, 0, 1), 0.5f);
  EXPECT_EQ(img.at(0, 0, 2), 1.0f);
  EXPECT_EQ(img.at(1, 1, 2), 0.0f);
  img.set(1, 0, 1, 7.0f);
  EXPECT_EQ(img.at(1, 0, 1), 1.0f);
}

TEST(ImageBuffer, SampleCountMustMatch) {
  try {
    ImageBuffer(2, 2, std::vector<float>(11, 0.0f));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

TEST(ImageBuffer, DataLengthIsHeightTimesWidthTimesThree) {
  ImageBuffer img(9, 13);
  EXPECT_EQ(img.samples().size(), 9u * 13u * 3u);
}

TEST(ToLuma, WhiteIsOne) {
  const auto l = to_luma(qtest::constant_image(8, 8, 1, 1, 1));
  for (float v : l.values()) EXPECT_NEAR(v, 1.0f, 1e-6f);
}

TEST(ToLuma, PureRedIsRec601Coefficient) {
  const auto l = to_luma(qtest::constant_image(8, 8, 1, 0, 0));
  EXPECT_NEAR(l.at(3, 3), 0.299f, 1e-6f);
}

TEST(ToLuma, MatchesWeightedSumAndStaysInRange) {
  const auto img = qtest::random_image(16, 16, 5);
  const auto l = to_luma(img);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      const double ref = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
      EXPECT_NEAR(l.at(y, x), ref, 1e-6);
      EXPECT_GE(l.at(y, x), 0.0f);
      EXPECT_LE(l.at(y, x), 1.0f);
    }
}

TEST(Blend, ZeroWeightIsBitIdenticalToBase) {
  const auto base = qtest::random_image(12, 10, 1);
  const auto over = qtest::random_image(12, 10, 2);
  EXPECT_TRUE(qtest::bit_identical(blend(base, over, PixelMap(12, 10, 0.0f)), base));
}

TEST(Blend, UnitWeightIsBitIdenticalToOverlay) {
  const auto base = qtest::random_image(12, 10, 1);
  const auto over = qtest::random_image(12, 10, 2);
  EXPECT_TRUE(qtest::bit_identical(blend(base, over, PixelMap(12, 10, 1.0f)), over));
}

TEST(Blend, ConvexCombinationAtOnePixel) {
  const auto base = qtest::constant_image(8, 8, 0, 0, 0);
  const auto over = qtest::constant_image(8, 8, 1, 1, 1);
  PixelMap w(8, 8, 0.0f);
  w.at(2, 5) = 0.3f;
  const auto out = blend(base, over, w);
  EXPECT_NEAR(out.at(2, 5, 1), 0.3f, 1e-7f);
  EXPECT_EQ(out.at(2, 4, 1), 0.0f);
}

TEST(Blend, ShapeMismatchThrows) {
  const auto a = qtest::random_image(8, 8, 1);
  const auto b = qtest::random_image(8, 9, 2);
  try {
    blend(a, b, PixelMap(8, 8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
  EXPECT_THROW(blend(a, a, PixelMap(9, 8)), Error);
}

TEST(Blend, MonotoneInWeightAndLocal) {
  const auto base = qtest::random_image(8, 8, 3);
  const auto over = qtest::random_image(8, 8, 4);
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> pick(0, 7);
  for (int trial = 0; trial < 50; ++trial) {
    const int y = pick(rng), x = pick(rng);
    PixelMap w0(8, 8, 0.25f);
    PixelMap w1 = w0;
    w1.at(y, x) = 0.75f;
    const auto o0 = blend(base, over, w0);
    const auto o1 = blend(base, over, w1);
    for (int yy = 0; yy < 8; ++yy)
      for (int xx = 0; xx < 8; ++xx)
        for (int c = 0; c < 3; ++c) {
          if (yy == y && xx == x) {
            EXPECT_LE(std::abs(o1.at(yy, xx, c) - over.at(yy, xx, c)),
                      std::abs(o0.at(yy, xx, c) - over.at(yy, xx, c)) + 1e-7f);
          } else {
            EXPECT_EQ(o0.at(yy, xx, c), o1.at(yy, xx, c));
          }
        }
  }
}

TEST(PixelMap, CropCopiesRectangle) {
  PixelMap m(4, 5);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) m.at(y, x) = static_cast<float>(10 * y + x);
  const auto c = m.crop(1, 3, 2, 5);
  ASSERT_EQ(c.height(), 2);
  ASSERT_EQ(c.width(), 3);
  EXPECT_EQ(c.at(0, 0), 12.0f);
  EXPECT_EQ(c.at(1, 2), 24.0f);
}

}  // namespace
