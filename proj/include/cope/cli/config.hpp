#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cope/backends/chat.hpp"
#include "cope/corpus/split.hpp"
#include "cope/features/svr.hpp"
#include "cope/stats/bootstrap.hpp"
#include "cope/stats/subgroups.hpp"
#include "cope/synth/generate.hpp"

namespace cope::cli {

struct PathsConfig {
  std::filesystem::path cache_dir = ".cope-cache";
};

struct TemplatesConfig {
  // Empty path: built-in template.
  std::filesystem::path reasoning;
  std::filesystem::path extraction;
  std::filesystem::path single_step;
};

struct RunSettings {
  unsigned concurrency = 4;
  std::string reasoning_backend = "mock";
  std::string extraction_backend;  // empty: same as the reasoning backend
};

struct StatsConfig {
  stats::BootstrapConfig bootstrap;
  double q = 0.05;
};

struct SplitConfig {
  corpus::Fraction fraction{1, 5};
  std::uint64_t seed = 20;
};

struct AppConfig {
  PathsConfig paths;
  TemplatesConfig templates;
  RunSettings run;
  SplitConfig split;
  StatsConfig stats;
  std::vector<stats::Axis> subgroup_axes{stats::Axis::sex, stats::Axis::evt, stats::Axis::note_length_quartile,
                                         stats::Axis::age_band};
  synth::SynthConfig synth;
  features::SvrHyperparams svr;
  std::map<std::string, backends::BackendConfig> backends;

  /// Throws ConfigError for an unknown name.
  const backends::BackendConfig& backend(const std::string& name) const;
};

/// Built-in defaults: a single "mock" backend and the settings above.
AppConfig default_config();

/// Parses TOML text, then applies `overrides` ("section.key=value", value in
/// TOML syntax; bare words are taken as strings). Relative paths resolve
/// against `base_dir`. Throws ConfigError listing every problem found.
AppConfig parse_config(const std::string& toml_text, const std::vector<std::string>& overrides = {},
                       const std::filesystem::path& base_dir = ".");
/// Reads `path` (may be empty for defaults only).
AppConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace cope::cli
