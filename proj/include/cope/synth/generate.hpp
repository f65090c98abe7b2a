#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cope/corpus/patient.hpp"
#include "cope/synth/oracle.hpp"

namespace cope::synth {

/// First line of every generated note.
inline constexpr std::string_view kSyntheticNoteHeader = "SYNTHETIC DISCHARGE SUMMARY";

/// Phrasing bank revision; must equal the extraction grammar version.
inline constexpr int kPhrasingBankVersion = 1;

struct SynthConfig {
  std::size_t n = 200;
  std::uint64_t seed = 1;
  int noise_level = 0;                  // 0, 1 or 2
  std::size_t note_length_target = 400;  // words, before per-note jitter
  int phrasing_bank_version = kPhrasingBankVersion;
};

struct SyntheticCorpus {
  corpus::Cohort cohort;
  std::vector<LatentProfile> profiles;  // aligned with cohort records
};

/// Throws ConfigError for n == 0, a noise level outside 0..2, or a phrasing
/// bank version that differs from the extraction grammar's.
SyntheticCorpus generate_corpus(const SynthConfig& config);

/// Renders one note for `profile`. Phrasing variants and filler come from
/// `seed`; filler sentences are added until the note reaches `target_words`.
std::string render_note(const LatentProfile& profile, std::uint64_t seed, std::size_t target_words);

std::string profiles_jsonl(const std::vector<LatentProfile>& profiles);

}  // namespace cope::synth
