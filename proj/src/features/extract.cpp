#include "cope/features/extract.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <map>

#include "cope/features/compiled_grammar.hpp"

namespace cope::features {

namespace {

struct Mention {
  std::string value;
  std::size_t end = 0;
  std::size_t length = 0;
};

bool later(const Mention& a, const Mention& b) {
  return a.end != b.end ? a.end > b.end : a.length > b.length;
}

}  // namespace

Extraction extract_features_audited(std::string_view note_text, const json& overrides, const Grammar& grammar) {
  std::map<std::string, std::vector<Mention>> mentions;
  const auto& rules = grammar.rules();
  const auto& patterns = grammar.compiled().patterns;
  const char* begin = note_text.data();
  const char* end = begin + note_text.size();
  for (std::size_t r = 0; r < rules.size(); ++r) {
    const GrammarRule& rule = rules[r];
    for (boost::cregex_iterator it(begin, end, patterns[r]), last; it != last; ++it) {
      const auto& m = *it;
      Mention mention;
      mention.end = static_cast<std::size_t>(m.position()) + static_cast<std::size_t>(m.length());
      mention.length = static_cast<std::size_t>(m.length());
      switch (rule.kind) {
        case RuleKind::numeric:
          mention.value = m.str(1);
          break;
        case RuleKind::flag:
          mention.value = rule.value;
          break;
        case RuleKind::choice: {
          mention.value = rule.value == "$1" ? m.str(1) : rule.value;
          for (auto& c : mention.value) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
          break;
        }
      }
      mentions[rule.field].push_back(std::move(mention));
    }
  }

  Extraction out;
  for (auto& [field, list] : mentions) {
    // Mentions sharing an end offset are alternative readings of one phrase
    // (e.g. "diabetes" inside "no history of diabetes"); keep the longest.
    std::map<std::size_t, Mention> by_end;
    for (auto& m : list) {
      auto [it, inserted] = by_end.emplace(m.end, m);
      if (!inserted && later(m, it->second)) it->second = m;
    }
    std::vector<std::string> values;
    for (auto& [pos, m] : by_end) {
      if (!set_field(out.features, field, m.value)) {
        spdlog::debug("extraction: dropped invalid {}={}", field, m.value);
        continue;
      }
      values.push_back(m.value);
    }
    bool conflicting = false;
    for (const auto& v : values) conflicting |= v != values.front();
    if (conflicting) {
      spdlog::debug("extraction: conflicting {} mentions, keeping last ({})", field, values.back());
      out.conflicts.push_back({field, values});
    }
  }
  apply_overrides(out.features, overrides);
  return out;
}

StructuredFeatures extract_features(std::string_view note_text, const json& overrides, const Grammar& grammar) {
  return extract_features_audited(note_text, overrides, grammar).features;
}

}  // namespace cope::features
