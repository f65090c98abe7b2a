#include "cope/features/grammar.hpp"

#include <boost/regex.hpp>

#include <algorithm>
#include <sstream>

#include "cope/features/compiled_grammar.hpp"
#include "cope/features/structured.hpp"
#include "cope/util/assets.hpp"
#include "cope/util/error.hpp"
#include "cope/util/io.hpp"

namespace cope::features {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Splits off the next space-delimited word.
std::string_view next_word(std::string_view& rest) {
  rest = trim(rest);
  auto space = rest.find_first_of(" \t");
  std::string_view word = rest.substr(0, space);
  rest = space == std::string_view::npos ? std::string_view{} : rest.substr(space + 1);
  return word;
}

}  // namespace

Grammar Grammar::parse(std::string_view text) {
  Grammar g;
  std::vector<std::string> problems;
  auto compiled = std::make_shared<Compiled>();
  const auto& known = field_names();
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "grammar line " + std::to_string(i + 1) + ": ";
    std::string_view rest = line;
    const std::string_view keyword = next_word(rest);
    if (keyword == "version") {
      try {
        g.version_ = std::stoi(std::string(trim(rest)));
      } catch (const std::exception&) {
        problems.push_back(where + "bad version");
      }
      continue;
    }
    GrammarRule rule;
    rule.line = i + 1;
    if (keyword == "numeric") {
      rule.kind = RuleKind::numeric;
    } else if (keyword == "flag") {
      rule.kind = RuleKind::flag;
    } else if (keyword == "choice") {
      rule.kind = RuleKind::choice;
    } else {
      problems.push_back(where + "unknown rule kind \"" + std::string(keyword) + "\"");
      continue;
    }
    rule.field = std::string(next_word(rest));
    if (std::find(known.begin(), known.end(), rule.field) == known.end()) {
      problems.push_back(where + "unknown field \"" + rule.field + "\"");
      continue;
    }
    if (rule.kind != RuleKind::numeric) rule.value = std::string(next_word(rest));
    if (rule.kind == RuleKind::flag && rule.value != "true" && rule.value != "false") {
      problems.push_back(where + "flag value must be true or false");
      continue;
    }
    rule.pattern = std::string(trim(rest));
    if (rule.pattern.empty()) {
      problems.push_back(where + "missing pattern");
      continue;
    }
    try {
      compiled->patterns.emplace_back(rule.pattern, boost::regex::ECMAScript | boost::regex::icase);
    } catch (const boost::regex_error& e) {
      problems.push_back(where + "invalid regex: " + e.what());
      continue;
    }
    if ((rule.kind == RuleKind::numeric || rule.value == "$1") && compiled->patterns.back().mark_count() < 1) {
      compiled->patterns.pop_back();
      problems.push_back(where + "pattern needs a capture group");
      continue;
    }
    g.rules_.push_back(std::move(rule));
  }
  if (g.version_ <= 0) problems.push_back("grammar: missing \"version <n>\" line");
  if (!problems.empty()) throw DataError("invalid extraction grammar", problems);
  g.compiled_ = std::move(compiled);
  return g;
}

const Grammar& default_grammar() {
  static const Grammar kGrammar = Grammar::parse(assets::find("grammar/extraction_grammar_v1.txt"));
  return kGrammar;
}

}  // namespace cope::features
