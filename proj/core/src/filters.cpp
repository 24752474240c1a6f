#include "qrefine/filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>

#include "qrefine/error.hpp"

namespace qrefine {
namespace {

// Separable convolution in double precision; unclamped intermediate.
std::vector<double> convolve_separable(const ImageBuffer& img, const std::vector<double>& taps) {
  const int h = img.height();
  const int w = img.width();
  const int radius = static_cast<int>(taps.size() / 2);
  auto src = img.samples();
  std::vector<double> tmp(src.size());
  std::vector<double> out(src.size());
  auto at = [w](int y, int x, int c) {
    return (static_cast<std::size_t>(y) * w + x) * 3 + static_cast<std::size_t>(c);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += taps[static_cast<std::size_t>(k + radius)] * src[at(y, std::clamp(x + k, 0, w - 1), c)];
        }
        tmp[at(y, x, c)] = acc;
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += taps[static_cast<std::size_t>(k + radius)] * tmp[at(std::clamp(y + k, 0, h - 1), x, c)];
        }
        out[at(y, x, c)] = acc;
      }
    }
  }
  return out;
}

ImageBuffer to_image(int h, int w, const std::vector<double>& values) {
  std::vector<float> samples(values.size());
  std::transform(values.begin(), values.end(), samples.begin(),
                 [](double v) { return static_cast<float>(v); });
  return ImageBuffer(h, w, std::move(samples));
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0) || radius < 0) throw Error(ErrorKind::kConfig, "gaussian needs sigma > 0");
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-(k * k) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = v;
    total += v;
  }
  for (double& v : taps) v /= total;
  return taps;
}

ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma, int radius) {
  if (radius < 0) radius = static_cast<int>(std::ceil(3.0 * sigma));
  return to_image(img.height(), img.width(), convolve_separable(img, gaussian_kernel(sigma, radius)));
}

ImageBuffer builtin_blind_enhance(const ImageBuffer& img) {
  const auto smooth = convolve_separable(img, gaussian_kernel(0.8, 1));
  const auto wide = convolve_separable(img, gaussian_kernel(1.5, static_cast<int>(std::ceil(4.5))));
  auto src = img.samples();
  std::vector<double> out(src.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = smooth[i] + 1.0 * (src[i] - wide[i]);
  return to_image(img.height(), img.width(), out);
}

ImageBuffer builtin_harmonic_inpaint(const ImageBuffer& img, const InpaintMask& mask,
                                     HarmonicOptions options, HarmonicStats* stats) {
  if (!mask.same_shape(img)) throw Error(ErrorKind::kShape, "mask and image differ in shape");
  if (!(options.omega > 0.0 && options.omega < 2.0)) {
    throw Error(ErrorKind::kConfig, "SOR relaxation must lie in (0,2)");
  }
  const int h = img.height();
  const int w = img.width();
  const auto m = mask.values();
  std::vector<std::int32_t> holes;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] != 0.0f) holes.push_back(static_cast<std::int32_t>(i));
  }
  HarmonicStats local;
  if (holes.empty()) {
    if (stats != nullptr) *stats = HarmonicStats{0, 0.0, true};
    return img;
  }
  const bool fully_masked = holes.size() == m.size();
  if (fully_masked && !options.allow_fully_masked) {
    throw Error(ErrorKind::kUnsolvable, "every pixel is masked");
  }

  // Every masked component must reach a known pixel; BFS from the known set.
  if (!fully_masked) {
    std::vector<std::uint8_t> reached(m.size(), 0);
    std::deque<std::int32_t> queue;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0.0f) {
        reached[i] = 1;
        queue.push_back(static_cast<std::int32_t>(i));
      }
    }
    while (!queue.empty()) {
      const int p = queue.front();
      queue.pop_front();
      const int y = p / w, x = p % w;
      const int nbr[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
      for (const auto& q : nbr) {
        if (q[0] < 0 || q[0] >= h || q[1] < 0 || q[1] >= w) continue;
        const std::size_t k = static_cast<std::size_t>(q[0]) * w + q[1];
        if (!reached[k]) {
          reached[k] = 1;
          queue.push_back(static_cast<std::int32_t>(k));
        }
      }
    }
    for (std::int32_t p : holes) {
      if (!reached[static_cast<std::size_t>(p)]) {
        throw Error(ErrorKind::kUnsolvable, "masked region has no unmasked neighbour path");
      }
    }
  }

  auto src = img.samples();
  std::vector<double> u(src.begin(), src.end());
  for (local.sweeps = 0; local.sweeps < options.iterations;) {
    double worst = 0.0;
    for (std::int32_t p : holes) {
      const int y = p / w, x = p % w;
      int count = 0;
      double acc[3] = {0.0, 0.0, 0.0};
      auto add = [&](int yy, int xx) {
        const std::size_t k = (static_cast<std::size_t>(yy) * w + xx) * 3;
        acc[0] += u[k];
        acc[1] += u[k + 1];
        acc[2] += u[k + 2];
        ++count;
      };
      if (y > 0) add(y - 1, x);
      if (y + 1 < h) add(y + 1, x);
      if (x > 0) add(y, x - 1);
      if (x + 1 < w) add(y, x + 1);
      const std::size_t k = static_cast<std::size_t>(p) * 3;
      for (int c = 0; c < 3; ++c) {
        const double delta = acc[c] / count - u[k + c];
        worst = std::max(worst, std::abs(delta));
        u[k + c] += options.omega * delta;
      }
    }
    ++local.sweeps;
    local.residual = worst;
    if (worst < options.tolerance) {
      local.converged = true;
      break;
    }
  }
  if (stats != nullptr) *stats = local;

  std::vector<float> out(src.begin(), src.end());
  for (std::int32_t p : holes) {
    const std::size_t k = static_cast<std::size_t>(p) * 3;
    for (int c = 0; c < 3; ++c) out[k + c] = static_cast<float>(u[k + c]);
  }
  return ImageBuffer(h, w, std::move(out));
}

}  // namespace qrefine
