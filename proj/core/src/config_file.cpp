#include "qrefine/config_file.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "qrefine/codec.hpp"
#include "qrefine/error.hpp"

namespace qrefine {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string text(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(ErrorKind::kConfig, std::string(key) + ": '" + text + "' is not a number");
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(ErrorKind::kConfig, std::string(key) + ": '" + std::string(value) + "' is not an integer");
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void set_config_value(RefineConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "b_lq") cfg.b_lq = parse_double(key, value);
  else if (key == "b_mq") cfg.b_mq = parse_double(key, value);
  else if (key == "b_hq") cfg.b_hq = parse_double(key, value);
  else if (key == "noise_mu") cfg.noise_mu = parse_double(key, value);
  else if (key == "noise_sigma") cfg.noise_sigma = parse_double(key, value);
  else if (key == "inpaint_strength") cfg.inpaint_strength = parse_double(key, value);
  else if (key == "enhance_strength") cfg.enhance_strength = parse_double(key, value);
  else if (key == "steps") cfg.steps = parse_int<int>(key, value);
  else if (key == "seed") cfg.seed = parse_int<std::uint64_t>(key, value);
  else if (key == "stages_enabled") cfg.stages_enabled = StageSet::parse(value);
  else if (key == "min_mask_fraction") cfg.min_mask_fraction = parse_double(key, value);
  else if (key == "positive_words") {
    cfg.positive_words.clear();
    std::size_t start = 0;
    while (start <= value.size()) {
      const auto comma = value.find(',', start);
      const auto word = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                 : comma - start));
      if (!word.empty()) cfg.positive_words.emplace_back(word);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  else if (key == "n") cfg.scorer.n = parse_int<int>(key, value);
  else if (key == "cells_per_patch_side") cfg.scorer.cells_per_patch_side = parse_int<int>(key, value);
  else if (key == "tau_s") cfg.scorer.tau_s = parse_double(key, value);
  else if (key == "tau_n") cfg.scorer.tau_n = parse_double(key, value);
  else throw Error(ErrorKind::kConfig, "unknown config key '" + std::string(key) + "'");
}

void apply_config_text(RefineConfig& cfg, std::string_view text) {
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
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kConfig, "line " + std::to_string(lineno) + ": expected key=value");
    }
    set_config_value(cfg, trim(view.substr(0, eq)), view.substr(eq + 1));
  }
}

RefineConfig load_config_file(const std::filesystem::path& path, RefineConfig base) {
  const Bytes bytes = read_file(path);
  apply_config_text(base, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  return base;
}

std::string format_config(const RefineConfig& cfg) {
  std::string out;
  auto line = [&out](std::string_view k, const std::string& v) {
    out.append(k);
    out += '=';
    out += v;
    out += '\n';
  };
  line("b_lq", num(cfg.b_lq));
  line("b_mq", num(cfg.b_mq));
  line("b_hq", num(cfg.b_hq));
  line("noise_mu", num(cfg.noise_mu));
  line("noise_sigma", num(cfg.noise_sigma));
  line("inpaint_strength", num(cfg.inpaint_strength));
  line("enhance_strength", num(cfg.enhance_strength));
  line("steps", std::to_string(cfg.steps));
  line("seed", std::to_string(cfg.seed));
  line("stages_enabled", cfg.stages_enabled.to_string());
  line("min_mask_fraction", num(cfg.min_mask_fraction));
  std::string words;
  for (const auto& w : cfg.positive_words) {
    if (!words.empty()) words += ", ";
    words += w;
  }
  line("positive_words", words);
  line("n", std::to_string(cfg.scorer.n));
  line("cells_per_patch_side", std::to_string(cfg.scorer.cells_per_patch_side));
  line("tau_s", num(cfg.scorer.tau_s));
  line("tau_n", num(cfg.scorer.tau_n));
  return out;
}

std::string config_hash(const RefineConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : format_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qrefine
