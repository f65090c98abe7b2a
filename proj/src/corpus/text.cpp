#include "cope/corpus/text.hpp"

#include <cctype>
#include <stdexcept>

namespace cope::corpus {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

std::vector<std::string> whitespace_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::vector<Segment> chunk_spans(std::size_t token_count, std::size_t window, std::size_t overlap) {
  if (window <= overlap) {
    throw std::invalid_argument("chunk window (" + std::to_string(window) +
                                ") must exceed overlap (" + std::to_string(overlap) + ")");
  }
  std::vector<Segment> segments;
  const std::size_t stride = window - overlap;
  for (std::size_t begin = 0; begin < token_count; begin += stride) {
    const std::size_t end = std::min(begin + window, token_count);
    segments.push_back({begin, end});
    if (end == token_count) break;
  }
  return segments;
}

std::vector<std::vector<std::string>> chunk_note(std::string_view text, const Tokenizer& tokenizer,
                                                 std::size_t window, std::size_t overlap) {
  const auto tokens = tokenizer(text);
  return chunk_text(std::span<const std::string>(tokens), window, overlap);
}

}  // namespace cope::corpus
