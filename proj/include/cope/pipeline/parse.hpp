#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace cope::pipeline {

enum class ParseError { no_candidate, ambiguous, out_of_range };
std::string_view to_string(ParseError error);

struct ParseOutcome {
  std::optional<int> value;  // in [0, 6] when present
  bool lenient = false;      // value came from the fallback pass
  std::optional<ParseError> error;
  std::vector<long long> candidates;  // every standalone integer seen, in order

  bool ok() const { return value.has_value(); }
};

/// Strict pass: the trimmed text is exactly one of "0".."6". Fallback: every
/// standalone integer token (not part of a decimal or a word; a leading '-'
/// is a sign unless it follows a digit) is collected; the parse succeeds when
/// the tokens within [0, 6] share one distinct value. Otherwise the error is
/// ambiguous (several distinct in-range values), out_of_range (only
/// out-of-range integers) or no_candidate. Never throws.
ParseOutcome parse_mrs(std::string_view raw);

}  // namespace cope::pipeline
