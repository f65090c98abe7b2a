#include "cope/backends/mock.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "cope/features/extract.hpp"
#include "cope/synth/generate.hpp"
#include "cope/synth/oracle.hpp"
#include "cope/util/hash.hpp"
#include "cope/util/rng.hpp"

namespace cope::backends {

namespace {

constexpr std::string_view kScorePhrase = "the most likely mRS score at 90 days is ";
constexpr std::uint64_t kSingleStepSalt = 0x51A61E57E9ULL;

std::uint64_t content_hash64(std::string_view text) {
  const std::string hex = sha256_hex(text);
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

int noisy_score(int oracle, int noise_level, std::uint64_t seed, std::string_view note, std::uint64_t salt) {
  if (noise_level <= 0) return oracle;
  SplitMix64 rng(mix64(seed ^ salt) ^ content_hash64(note));
  if (!rng.chance(0.5)) return oracle;
  const int magnitude = rng.between(1, noise_level);
  const int shifted = rng.chance(0.5) ? oracle + magnitude : oracle - magnitude;
  return std::clamp(shifted, 0, 6);
}

std::string yes_no(const std::optional<bool>& v, std::string_view yes, std::string_view no) {
  if (!v) return "not documented";
  return std::string(*v ? yes : no);
}

template <typename T>
std::string value_or_unknown(const std::optional<T>& v) {
  if (!v) return "not documented";
  std::ostringstream os;
  os << *v;
  return os.str();
}

std::string reasoning_text(const features::StructuredFeatures& f, int score) {
  std::ostringstream os;
  os << "Key clinical cues from the discharge summary:\n";
  os << "- Age: " << value_or_unknown(f.age_years) << " years\n";
  os << "- Sex: " << (f.sex ? std::string(corpus::to_string(*f.sex)) : "not documented") << "\n";
  os << "- NIHSS on admission: " << value_or_unknown(f.nihss_baseline) << "\n";
  os << "- NIHSS at 24 hours: " << value_or_unknown(f.nihss_24h) << "\n";
  os << "- NIHSS at discharge: " << value_or_unknown(f.nihss_discharge) << "\n";
  os << "- Thrombectomy: " << yes_no(f.evt, "performed", "not performed") << "\n";
  os << "- IV thrombolysis: " << yes_no(f.iv_tpa, "given", "not given") << "\n";
  os << "- Discharge destination: "
     << (f.discharge_destination ? std::string(features::to_string(*f.discharge_destination)) : "not documented")
     << "\n\n";
  os << "Residual deficits at discharge are the main driver of long-term function, with age limiting "
        "recovery potential. Based on these findings, "
     << kScorePhrase << score << ".";
  return os.str();
}

}  // namespace

std::string mock_complete(const ChatRequest& request, int noise_level, std::uint64_t seed) {
  const std::string prompt = request.joined_content();
  const auto header = prompt.find(synth::kSyntheticNoteHeader);
  if (header != std::string::npos) {
    const std::string_view note = std::string_view(prompt).substr(header);
    const features::StructuredFeatures f = features::extract_features(note);
    if (!f.nihss_discharge || !f.age_years) {
      throw BackendError("mock backend: synthetic note lacks discharge NIHSS or age");
    }
    const int oracle = synth::oracle_mrs(*f.nihss_discharge, *f.age_years);
    const bool single_step = prompt.find("single integer") != std::string::npos;
    if (single_step) return std::to_string(noisy_score(oracle, noise_level, seed, note, kSingleStepSalt));
    return reasoning_text(f, noisy_score(oracle, noise_level, seed, note, 0));
  }
  const auto phrase = prompt.rfind(kScorePhrase);
  if (phrase != std::string::npos) {
    const std::size_t pos = phrase + kScorePhrase.size();
    if (pos < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[pos]))) {
      std::size_t end = pos;
      while (end < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[end]))) ++end;
      return prompt.substr(pos, end - pos);
    }
  }
  throw BackendError("mock backend: prompt is neither a synthetic reasoning prompt nor an extraction prompt");
}

}  // namespace cope::backends
