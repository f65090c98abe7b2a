#include "cope/pipeline/parse.hpp"

#include <cctype>
#include <set>

namespace cope::pipeline {

std::string_view to_string(ParseError error) {
  switch (error) {
    case ParseError::no_candidate: return "no_candidate";
    case ParseError::ambiguous: return "ambiguous";
    case ParseError::out_of_range: return "out_of_range";
  }
  return "?";
}

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<long long> integer_tokens(std::string_view text) {
  std::vector<long long> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    std::size_t end = i;
    while (end < text.size() && is_digit(text[end])) ++end;
    i = end;
    // Part of a word or identifier.
    if (begin > 0 && (is_alnum(text[begin - 1]) || text[begin - 1] == '_')) continue;
    if (end < text.size() && (is_alnum(text[end]) || text[end] == '_')) continue;
    // Part of a decimal number on either side.
    if (begin >= 2 && text[begin - 1] == '.' && is_digit(text[begin - 2])) continue;
    if (end + 1 < text.size() && text[end] == '.' && is_digit(text[end + 1])) continue;
    bool negative = false;
    if (begin > 0 && text[begin - 1] == '-') {
      negative = begin == 1 || !(is_alnum(text[begin - 2]));
    }
    const std::string_view digits = text.substr(begin, end - begin);
    long long value = 0;
    bool overflow = false;
    for (char c : digits) {
      if (value > 100000000000000LL) {
        overflow = true;
        break;
      }
      value = value * 10 + (c - '0');
    }
    if (overflow) value = 1000000000000000LL;
    out.push_back(negative ? -value : value);
  }
  return out;
}

}  // namespace

ParseOutcome parse_mrs(std::string_view raw) {
  ParseOutcome outcome;
  const std::string_view t = trim(raw);
  if (t.size() == 1 && t[0] >= '0' && t[0] <= '6') {
    outcome.value = t[0] - '0';
    outcome.candidates = {t[0] - '0'};
    return outcome;
  }
  outcome.candidates = integer_tokens(raw);
  std::set<long long> in_range;
  for (long long v : outcome.candidates) {
    if (v >= 0 && v <= 6) in_range.insert(v);
  }
  if (in_range.size() == 1) {
    outcome.value = static_cast<int>(*in_range.begin());
    outcome.lenient = true;
  } else if (in_range.size() > 1) {
    outcome.error = ParseError::ambiguous;
  } else if (!outcome.candidates.empty()) {
    outcome.error = ParseError::out_of_range;
  } else {
    outcome.error = ParseError::no_candidate;
  }
  return outcome;
}

}  // namespace cope::pipeline
