#include "qrefine/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace qrefine {

ImageBuffer synthesize_clean(std::uint64_t seed, int size) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  std::array<double, 3> c0{}, c1{}, tint{};
  for (double& v : c0) v = uniform(0.35, 0.65);
  for (double& v : c1) v = uniform(0.35, 0.65);
  const double gx = uniform(-1.0, 1.0);
  const double gy = uniform(-1.0, 1.0);

  struct Wave {
    double amplitude, kx, ky, phase;
  };
  std::vector<Wave> waves;
  constexpr int kWaves = 8;
  for (int k = 0; k < kWaves; ++k) {
    const double wavelength = uniform(4.0, 7.0);
    const double theta = (k % 2) * std::numbers::pi / 2.0 + uniform(-0.3, 0.3);
    const double phase = uniform(0.0, 2.0 * std::numbers::pi);
    const double amplitude = uniform(0.04, 0.06);
    const double freq = 2.0 * std::numbers::pi / wavelength;
    waves.push_back({amplitude, freq * std::cos(theta), freq * std::sin(theta), phase});
  }
  for (double& v : tint) v = uniform(0.8, 1.0);

  // Gradient centred so its mean over the image is zero.
  const double centre = (gx + gy) * (size - 1) / (2.0 * size);
  std::vector<float> samples(static_cast<std::size_t>(size) * size * 3);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double t = (gx * x + gy * y) / size - centre;
      double texture = 0.0;
      for (const Wave& w : waves) texture += w.amplitude * std::sin(w.kx * x + w.ky * y + w.phase);
      const std::size_t i = (static_cast<std::size_t>(y) * size + x) * 3;
      for (int c = 0; c < 3; ++c) {
        samples[i + c] = static_cast<float>(c0[c] + t * (c1[c] - c0[c]) + texture * tint[c]);
      }
    }
  }
  return ImageBuffer(size, size, std::move(samples));
}

}  // namespace qrefine
