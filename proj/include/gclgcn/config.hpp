// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gclgcn/training.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gclgcn {

/// Flat key=value experiment description. '#' starts a comment.
struct ConfigFile {
  ExperimentConfig experiment;
  std::string dataset;
  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> edges;
  std::optional<std::filesystem::path> labels;

  bool operator==(const ConfigFile&) const = default;
};

/// Hyperparameter rows for the benchmark datasets ("cora", "acm", ...).
ExperimentConfig preset_config(std::string_view name);
std::vector<std::string> preset_names();

/// Without a `preset` key, epochs, alpha, beta, n_z, lr, lambda, theta,
/// gamma and epsilon are required. Relative dataset paths resolve against
/// `base_dir`. Throws ConfigError (or ParseError for malformed numbers).
ConfigFile parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
ConfigFile parse_config(const std::filesystem::path& path);

/// Every key written explicitly; parse_config_text inverts it.
std::string write_config(const ConfigFile& cfg);

/// Applies one key=value pair on top of an existing config (no validation).
void apply_setting(ConfigFile& cfg, std::string_view key, std::string_view value,
                   const std::filesystem::path& base_dir = {});

}  // namespace gclgcn
