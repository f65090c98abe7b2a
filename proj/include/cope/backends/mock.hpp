#pragma once

#include <cstdint>
#include <string>

#include "cope/backends/chat.hpp"

namespace cope::backends {

/// Deterministic stand-in for the reasoning and extraction models, valid only
/// for prompts built over synthetic notes.
///   - reasoning prompt (synthetic note present): reasoning text restating the
///     note's variables and ending "the most likely mRS score at 90 days is X"
///   - single-step prompt (synthetic note plus "single integer"): "X"
///   - extraction prompt (reasoning text present): the stated score
/// X is the synthetic oracle score of the note, shifted by up to noise_level
/// points (clamped to 0..6) from a stream keyed by seed and note content.
/// Throws BackendError for any other prompt.
std::string mock_complete(const ChatRequest& request, int noise_level = 0, std::uint64_t seed = 0);

}  // namespace cope::backends
