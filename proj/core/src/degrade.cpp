#include "qrefine/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "qrefine/codec.hpp"
#include "qrefine/error.hpp"
#include "qrefine/filters.hpp"
#include "qrefine/stages.hpp"
#include "qrefine/synthetic.hpp"

namespace qrefine {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct PixelRect {
  int row0, row1, col0, col1;
};

PixelRect to_pixels(const DegradeRegion& r, int h, int w) {
  return {static_cast<int>(std::floor(r.y0 * h)), static_cast<int>(std::floor(r.y1 * h)),
          static_cast<int>(std::floor(r.x0 * w)), static_cast<int>(std::floor(r.x1 * w))};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

void DegradeSpec::validate() const {
  if (regions.empty()) throw Error(ErrorKind::kSpec, "degradation spec has no regions");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const DegradeRegion& r = regions[i];
    const std::string where = "region " + std::to_string(i);
    if (!(r.x0 >= 0.0 && r.y0 >= 0.0 && r.x1 <= 1.0 && r.y1 <= 1.0)) {
      throw Error(ErrorKind::kSpec, where + " lies outside the unit square");
    }
    if (!(r.x0 < r.x1 && r.y0 < r.y1)) throw Error(ErrorKind::kSpec, where + " is empty or inverted");
    if (r.op == DegradeOp::kGaussianBlur && !(r.sigma >= 1.0 && r.sigma <= 4.0)) {
      throw Error(ErrorKind::kSpec, where + ": blur sigma must lie in [1,4]");
    }
    if (r.op == DegradeOp::kAdditiveNoise && !(r.sigma >= 0.05 && r.sigma <= 0.2)) {
      throw Error(ErrorKind::kSpec, where + ": noise sigma must lie in [0.05,0.2]");
    }
  }
}

DegradeSpec parse_degrade_spec(std::string_view text) {
  DegradeSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    const std::string where = "spec line " + std::to_string(lineno);
    if (eq == std::string_view::npos) throw Error(ErrorKind::kSpec, where + ": expected key=value");
    const auto key = trim(view.substr(0, eq));
    const std::string value(trim(view.substr(eq + 1)));
    try {
      if (key == "seed") {
        spec.seed = std::stoull(value);
      } else if (key == "region") {
        std::vector<std::string> parts;
        std::stringstream ss(value);
        std::string part;
        while (std::getline(ss, part, ',')) parts.emplace_back(trim(part));
        if (parts.size() != 6) throw Error(ErrorKind::kSpec, where + ": region needs 6 fields");
        DegradeRegion r;
        r.x0 = std::stod(parts[0]);
        r.y0 = std::stod(parts[1]);
        r.x1 = std::stod(parts[2]);
        r.y1 = std::stod(parts[3]);
        if (parts[4] == "blur") r.op = DegradeOp::kGaussianBlur;
        else if (parts[4] == "noise") r.op = DegradeOp::kAdditiveNoise;
        else throw Error(ErrorKind::kSpec, where + ": unknown operation '" + parts[4] + "'");
        r.sigma = std::stod(parts[5]);
        spec.regions.push_back(r);
      } else {
        throw Error(ErrorKind::kSpec, where + ": unknown key '" + std::string(key) + "'");
      }
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::kSpec, where + ": malformed number");
    } catch (const std::out_of_range&) {
      throw Error(ErrorKind::kSpec, where + ": number out of range");
    }
  }
  spec.validate();
  return spec;
}

std::string format_degrade_spec(const DegradeSpec& spec) {
  std::string out = "seed=" + std::to_string(spec.seed) + "\n";
  for (const auto& r : spec.regions) {
    out += "region=" + fmt(r.x0) + "," + fmt(r.y0) + "," + fmt(r.x1) + "," + fmt(r.y1) + "," +
           (r.op == DegradeOp::kGaussianBlur ? "blur" : "noise") + "," + fmt(r.sigma) + "\n";
  }
  return out;
}

DegradeSpec random_degrade_spec(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  DegradeSpec spec;
  spec.seed = seed;
  const int count = std::uniform_int_distribution<int>(1, 2)(rng);
  for (int i = 0; i < count; ++i) {
    DegradeRegion r;
    const double w = uniform(0.35, 0.55);
    const double h = uniform(0.35, 0.55);
    r.x0 = uniform(0.0, 1.0 - w);
    r.y0 = uniform(0.0, 1.0 - h);
    r.x1 = r.x0 + w;
    r.y1 = r.y0 + h;
    if (uniform(0.0, 1.0) < 0.5) {
      r.op = DegradeOp::kGaussianBlur;
      r.sigma = uniform(1.0, 4.0);
    } else {
      r.op = DegradeOp::kAdditiveNoise;
      r.sigma = uniform(0.05, 0.2);
    }
    spec.regions.push_back(r);
  }
  return spec;
}

DegradedImage apply_degradation(const ImageBuffer& clean, const DegradeSpec& spec) {
  spec.validate();
  const int h = clean.height();
  const int w = clean.width();
  ImageBuffer out = clean;
  InpaintMask truth(h, w, 0.0f);
  for (std::size_t i = 0; i < spec.regions.size(); ++i) {
    const DegradeRegion& r = spec.regions[i];
    const PixelRect px = to_pixels(r, h, w);
    if (px.row0 >= px.row1 || px.col0 >= px.col1) continue;
    if (r.op == DegradeOp::kGaussianBlur) {
      const ImageBuffer blurred = gaussian_blur(out, r.sigma);
      for (int y = px.row0; y < px.row1; ++y) {
        for (int x = px.col0; x < px.col1; ++x) {
          for (int c = 0; c < 3; ++c) out.set(y, x, c, blurred.at(y, x, c));
        }
      }
    } else {
      std::mt19937_64 rng(mix_seed(spec.seed, i));
      std::normal_distribution<double> normal(0.0, r.sigma);
      for (int y = px.row0; y < px.row1; ++y) {
        for (int x = px.col0; x < px.col1; ++x) {
          for (int c = 0; c < 3; ++c) {
            out.set(y, x, c, static_cast<float>(out.at(y, x, c) + normal(rng)));
          }
        }
      }
    }
    for (int y = px.row0; y < px.row1; ++y) {
      for (int x = px.col0; x < px.col1; ++x) truth.at(y, x) = 1.0f;
    }
  }
  if (mask_fraction(truth) >= 1.0) throw Error(ErrorKind::kSpec, "regions leave no clean pixel");
  return {std::move(out), std::move(truth)};
}

std::vector<SyntheticSample> build_synthetic_corpus(std::uint64_t seed, int count, int size) {
  std::vector<SyntheticSample> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "img_%03d", k);
    SyntheticSample s;
    s.id = id;
    s.clean = synthesize_clean(mix_seed(seed, 2 * static_cast<std::uint64_t>(k)), size);
    s.spec = random_degrade_spec(mix_seed(seed, 2 * static_cast<std::uint64_t>(k) + 1));
    s.degraded = apply_degradation(s.clean, s.spec);
    out.push_back(std::move(s));
  }
  return out;
}

void write_corpus(const fs::path& dir, const std::vector<SyntheticSample>& samples) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& s : samples) {
    write_file(dir / (s.id + ".png"), encode_png(s.degraded.image));
    write_file(dir / (s.id + "_mask.png"), encode_mask_png(s.degraded.truth));
  }
}

std::vector<CorpusImage> load_corpus(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorKind::kIo, "corpus directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (!is_image_file(p) || ends_with(p.stem().string(), "_mask")) continue;
    files.push_back(p);
  }
  if (ec) throw Error(ErrorKind::kIo, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  std::vector<CorpusImage> out;
  for (const auto& p : files) {
    CorpusImage img;
    img.id = p.stem().string();
    img.image = decode_image(read_file(p));
    const fs::path mask = dir / (img.id + "_mask.png");
    if (fs::exists(mask)) {
      img.truth = decode_mask_png(read_file(mask));
      if (!img.truth->same_shape(img.image)) throw Error(ErrorKind::kShape, "mask for " + img.id + " differs in size");
    }
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<CorpusImage> to_corpus(const std::vector<SyntheticSample>& samples) {
  std::vector<CorpusImage> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.id, s.degraded.image, s.degraded.truth});
  return out;
}

}  // namespace qrefine
