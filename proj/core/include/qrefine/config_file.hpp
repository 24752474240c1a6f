#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "qrefine/stages.hpp"

namespace qrefine {

// Flat key=value configuration. Keys are the RefineConfig field names
// (b_lq, b_mq, b_hq, noise_mu, noise_sigma, inpaint_strength,
// enhance_strength, steps, seed, stages_enabled, min_mask_fraction,
// positive_words) plus the scorer fields (n, cells_per_patch_side, tau_s,
// tau_n). '#' starts a comment; blank lines are ignored. positive_words is
// a comma-separated list, stages_enabled a "1,2,3" list.

/// Applies one key/value pair. Throws kConfig on unknown keys or bad values.
void set_config_value(RefineConfig& cfg, std::string_view key, std::string_view value);

/// Applies every assignment in `text` on top of `cfg`. Does not validate
/// cross-field invariants; call RefineConfig::validate afterwards.
void apply_config_text(RefineConfig& cfg, std::string_view text);

RefineConfig load_config_file(const std::filesystem::path& path, RefineConfig base = {});

/// Canonical serialization: every key, fixed order, round-trips through
/// apply_config_text.
std::string format_config(const RefineConfig& cfg);

/// FNV-1a 64 of format_config, as 16 lowercase hex digits.
std::string config_hash(const RefineConfig& cfg);

}  // namespace qrefine
