#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cope::corpus {

/// Number of maximal runs of non-whitespace characters.
std::size_t word_count(std::string_view text);

using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

std::vector<std::string> whitespace_tokenize(std::string_view text);

/// Half-open token span [begin, end).
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Segment&) const = default;
};

/// Sliding windows over `token_count` tokens. Segment k starts at
/// k * (window - overlap); the last segment is the first one that reaches the
/// end. Throws std::invalid_argument unless window > overlap.
std::vector<Segment> chunk_spans(std::size_t token_count, std::size_t window = 512,
                                 std::size_t overlap = 50);

template <typename Token>
std::vector<std::vector<Token>> chunk_text(std::span<const Token> tokens, std::size_t window = 512,
                                           std::size_t overlap = 50) {
  std::vector<std::vector<Token>> out;
  for (const Segment& s : chunk_spans(tokens.size(), window, overlap)) {
    out.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(s.begin),
                     tokens.begin() + static_cast<std::ptrdiff_t>(s.end));
  }
  return out;
}

/// Tokenizes `text` (whitespace by default) and chunks the tokens.
std::vector<std::vector<std::string>> chunk_note(std::string_view text,
                                                 const Tokenizer& tokenizer = whitespace_tokenize,
                                                 std::size_t window = 512,
                                                 std::size_t overlap = 50);

}  // namespace cope::corpus
