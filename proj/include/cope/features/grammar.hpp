#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cope::features {

enum class RuleKind { numeric, flag, choice };

struct GrammarRule {
  RuleKind kind = RuleKind::numeric;
  std::string field;
  std::string value;    // flag: "true"/"false"; choice: value or "$1"
  std::string pattern;  // ECMAScript-compatible, matched case-insensitively
  std::size_t line = 0;
};

/// Versioned, line-oriented extraction grammar. The shipped default lives in
/// assets/grammar/extraction_grammar_v1.txt.
class Grammar {
 public:
  /// Throws DataError naming the offending line on syntax errors, unknown
  /// fields, or regexes that fail to compile.
  static Grammar parse(std::string_view text);

  int version() const { return version_; }
  const std::vector<GrammarRule>& rules() const { return rules_; }

  struct Compiled;
  const Compiled& compiled() const { return *compiled_; }

 private:
  int version_ = 0;
  std::vector<GrammarRule> rules_;
  std::shared_ptr<const Compiled> compiled_;
};

const Grammar& default_grammar();

}  // namespace cope::features
