#pragma once

#include <cstdint>
#include <string>

#include "cope/features/structured.hpp"
#include "cope/util/json.hpp"

namespace cope::synth {

/// Ground-truth patient behind a synthetic note. Every StructuredFeatures
/// field is populated.
struct LatentProfile {
  std::string id;
  features::StructuredFeatures features;
  int noise_level = 0;
  std::uint64_t seed = 0;
  int label_shift = 0;  // label minus oracle_mrs

  bool operator==(const LatentProfile&) const = default;
};

/// Empty when the profile is complete and physiologically consistent;
/// otherwise one message per violated rule.
std::vector<std::string> validate(const LatentProfile& profile);

/// Synthetic outcome convention: discharge NIHSS bands
/// {0 -> 0, 1-4 -> 1, 5-9 -> 2, 10-14 -> 3, 15-20 -> 4, >20 -> 5},
/// plus one for age over 80, clamped to [0, 6].
int oracle_mrs(int nihss_discharge, double age_years);
/// Throws std::invalid_argument if discharge NIHSS or age is missing.
int oracle_mrs(const LatentProfile& profile);

ojson to_json(const LatentProfile& profile);
LatentProfile profile_from_json(const json& j);

}  // namespace cope::synth
