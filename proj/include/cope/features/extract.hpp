#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cope/features/grammar.hpp"
#include "cope/features/structured.hpp"

namespace cope::features {

/// Two different values found for one field at different places in a note.
struct ExtractionConflict {
  std::string field;
  std::vector<std::string> values;  // in note order; the last one is kept
};

struct Extraction {
  StructuredFeatures features;
  std::vector<ExtractionConflict> conflicts;
};

/// Applies every grammar rule to `note_text`. Per field the mention ending
/// last wins (longer match at equal end). `overrides` (a JSON object keyed by
/// field name, or null) replaces extracted values.
Extraction extract_features_audited(std::string_view note_text, const json& overrides = nullptr,
                                    const Grammar& grammar = default_grammar());

StructuredFeatures extract_features(std::string_view note_text, const json& overrides = nullptr,
                                    const Grammar& grammar = default_grammar());

}  // namespace cope::features
