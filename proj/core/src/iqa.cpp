#include "qrefine/iqa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "qrefine/error.hpp"

namespace qrefine {
namespace {

int floor_bound(int index, int extent, int parts) {
  return static_cast<int>((static_cast<long long>(index) * extent) / parts);
}

}  // namespace

std::vector<PatchRect> split_patches(int height, int width, int n) {
  if (n < 1 || n > std::min(height, width)) {
    throw Error(ErrorKind::kSize, "cannot split " + std::to_string(height) + "x" +
                                      std::to_string(width) + " into " + std::to_string(n) +
                                      " patches per side");
  }
  std::vector<PatchRect> out;
  out.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.push_back({floor_bound(i, height, n), floor_bound(i + 1, height, n),
                     floor_bound(j, width, n), floor_bound(j + 1, width, n)});
    }
  }
  return out;
}

void ScorerConfig::validate() const {
  if (n < 2) throw Error(ErrorKind::kConfig, "n must be at least 2");
  if (cells_per_patch_side < 1) throw Error(ErrorKind::kConfig, "cells_per_patch_side must be positive");
  if (!(tau_s > 0.0) || !(tau_n > 0.0)) throw Error(ErrorKind::kConfig, "tau_s and tau_n must be positive");
}

CellStats cell_stats(const PixelMap& cell, double tau_s, double tau_n) {
  const int h = cell.height();
  const int w = cell.width();
  if (h < 3 || w < 3) {
    throw Error(ErrorKind::kSize, "cell " + std::to_string(h) + "x" + std::to_string(w) +
                                      " is smaller than 3x3");
  }
  // Single pass over the interior: Laplacian moments and Immerkær |M * I|.
  double sum = 0.0;
  double sum_sq = 0.0;
  double abs_sum = 0.0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double c = cell.at(y, x);
      const double up = cell.at(y - 1, x), down = cell.at(y + 1, x);
      const double left = cell.at(y, x - 1), right = cell.at(y, x + 1);
      const double corners = cell.at(y - 1, x - 1) + cell.at(y - 1, x + 1) +
                             cell.at(y + 1, x - 1) + cell.at(y + 1, x + 1);
      const double lap = up + down + left + right - 4.0 * c;
      sum += lap;
      sum_sq += lap * lap;
      abs_sum += std::abs(corners - 2.0 * (up + down + left + right) + 4.0 * c);
    }
  }
  const double count = static_cast<double>(h - 2) * static_cast<double>(w - 2);
  const double mean = sum / count;
  CellStats st;
  st.laplacian_variance = std::max(0.0, sum_sq / count - mean * mean);
  st.sharpness = st.laplacian_variance / (st.laplacian_variance + tau_s);
  st.noise_sigma = std::sqrt(std::numbers::pi / 2.0) * abs_sum / (6.0 * count);
  st.noise_penalty = st.noise_sigma / (st.noise_sigma + tau_n);
  st.score = std::clamp(st.sharpness * (1.0 - st.noise_penalty), 0.0, 1.0);
  return st;
}

double cell_score(const PixelMap& luma_cell, double tau_s, double tau_n) {
  return cell_stats(luma_cell, tau_s, tau_n).score;
}

CellGrid::CellGrid(int side, std::vector<float> values) : side_(side), values_(std::move(values)) {
  if (side < 1 || values_.size() != static_cast<std::size_t>(side) * side) {
    throw Error(ErrorKind::kShape, "cell grid needs side*side values");
  }
}

double CellGrid::mean() const noexcept {
  if (values_.empty()) return 0.0;
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

CellAnalysis analyze_cells(const ImageBuffer& img, const ScorerConfig& cfg) {
  cfg.validate();
  const int m = cfg.cells_per_side();
  const auto rects = split_patches(img.height(), img.width(), m);
  const PixelMap luma = to_luma(img);
  std::vector<float> score(rects.size()), sharp(rects.size()), noise(rects.size());
  for (std::size_t k = 0; k < rects.size(); ++k) {
    const PatchRect& r = rects[k];
    const CellStats st = cell_stats(luma.crop(r.row0, r.row1, r.col0, r.col1), cfg.tau_s, cfg.tau_n);
    score[k] = static_cast<float>(st.score);
    sharp[k] = static_cast<float>(st.sharpness);
    noise[k] = static_cast<float>(st.noise_sigma);
  }
  return {CellGrid(m, std::move(score)), CellGrid(m, std::move(sharp)), CellGrid(m, std::move(noise))};
}

CellGrid score_cells(const ImageBuffer& img, const ScorerConfig& cfg) {
  return analyze_cells(img, cfg).score;
}

QualityMap::QualityMap(int n, std::vector<float> scores) : n_(n), scores_(std::move(scores)) {
  if (n < 2) throw Error(ErrorKind::kConfig, "quality map needs n >= 2");
  if (scores_.size() != static_cast<std::size_t>(n) * n) {
    throw Error(ErrorKind::kShape, "quality map needs n*n scores");
  }
  for (float v : scores_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw Error(ErrorKind::kConfig, "quality score outside [0,1]");
  }
}

QualityMap pool_patches(const CellGrid& cells, const ScorerConfig& cfg) {
  const int k = cfg.cells_per_patch_side;
  if (k < 1 || cells.side() != cfg.n * k) {
    throw Error(ErrorKind::kShape, "cell grid side " + std::to_string(cells.side()) + " does not match " +
                                       std::to_string(cfg.n) + " patches of " + std::to_string(k) + " cells");
  }
  const int n = cfg.n;
  std::vector<float> scores(static_cast<std::size_t>(n) * n, 0.0f);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      float best = cells.at(i * k, j * k);
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) best = std::max(best, cells.at(i * k + a, j * k + b));
      }
      scores[static_cast<std::size_t>(i * n + j)] = best;
    }
  }
  return QualityMap(n, std::move(scores));
}

double global_quality(const QualityMap& map) {
  const auto& s = map.scores();
  if (s.empty()) return 0.0;
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

ClassicalScorer::ClassicalScorer(ScorerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

QualityMap ClassicalScorer::quality_map(const ImageBuffer& img) const {
  return pool_patches(score_cells(img, cfg_), cfg_);
}

std::string format_grid(const QualityMap& map) {
  std::string out;
  char buf[32];
  for (int i = 0; i < map.n(); ++i) {
    for (int j = 0; j < map.n(); ++j) {
      std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(map.at(i, j)));
      if (j > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

QualityMap parse_grid(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<float> values;
  int rows = 0;
  int cols = -1;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    int count = 0;
    double v = 0.0;
    while (row >> v) {
      values.push_back(static_cast<float>(v));
      ++count;
    }
    if (!row.eof()) throw Error(ErrorKind::kDecode, "non-numeric token in quality grid");
    if (cols >= 0 && count != cols) throw Error(ErrorKind::kShape, "ragged quality grid");
    cols = count;
    ++rows;
  }
  if (rows != cols) throw Error(ErrorKind::kShape, "quality grid is not square");
  return QualityMap(rows, std::move(values));
}

Bytes quality_heatmap_png(const QualityMap& map) {
  return encode_gray_png(PixelMap(map.n(), map.n(), map.scores()));
}

}  // namespace qrefine
