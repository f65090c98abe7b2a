#include <doctest.h>

#include <set>

#include "cope/corpus/ingest.hpp"
#include "cope/features/extract.hpp"
#include "cope/synth/generate.hpp"
#include "cope/synth/oracle.hpp"
#include "cope/util/error.hpp"
#include "oracles.hpp"

using namespace cope;
using namespace cope::synth;

TEST_CASE("oracle_mrs: declared table") {
  CHECK(oracle_mrs(0, 50) == 0);
  CHECK(oracle_mrs(17, 85) == 5);
  CHECK(oracle_mrs(22, 85) == 6);
  for (int nihss = 0; nihss <= 42; ++nihss) {
    for (double age : {30.0, 80.0, 81.0, 95.0}) CHECK(oracle_mrs(nihss, age) == oracle::mrs_from(nihss, age));
  }
}

TEST_CASE("generate: single record carries its NIHSS phrase and oracle label") {
  SynthConfig config;
  config.n = 1;
  const auto corpus = generate_corpus(config);
  REQUIRE(corpus.cohort.size() == 1);
  const auto& record = corpus.cohort.records()[0];
  const auto& profile = corpus.profiles[0];
  CHECK(record.note_text.find(std::to_string(*profile.features.nihss_discharge)) != std::string::npos);
  CHECK(record.mrs_90d == oracle_mrs(profile));
  CHECK(record.note_text.rfind(std::string(kSyntheticNoteHeader), 0) == 0);
}

TEST_CASE("generate: byte-identical across runs") {
  SynthConfig config;
  config.n = 50;
  config.seed = 42;
  config.noise_level = 1;
  CHECK(corpus::serialize_jsonl(generate_corpus(config).cohort) ==
        corpus::serialize_jsonl(generate_corpus(config).cohort));
  config.seed = 43;
  CHECK(corpus::serialize_jsonl(generate_corpus(config).cohort) !=
        corpus::serialize_jsonl(generate_corpus(SynthConfig{50, 42, 1}).cohort));
}

TEST_CASE("generate: 200 notes extract back to their profiles") {
  SynthConfig config;
  config.n = 200;
  config.seed = 8;
  const auto corpus = generate_corpus(config);
  std::set<int> labels;
  for (std::size_t i = 0; i < corpus.profiles.size(); ++i) {
    const auto& profile = corpus.profiles[i];
    CHECK(validate(profile).empty());
    const auto extracted = features::extract_features(corpus.cohort.records()[i].note_text);
    CHECK(extracted == profile.features);
    labels.insert(*corpus.cohort.records()[i].mrs_90d);
  }
  CHECK(labels.size() == 7);
}

TEST_CASE("generate: label noise stays within one point") {
  SynthConfig config;
  config.n = 300;
  config.noise_level = 1;
  const auto corpus = generate_corpus(config);
  int shifted = 0;
  for (std::size_t i = 0; i < corpus.profiles.size(); ++i) {
    const int diff = *corpus.cohort.records()[i].mrs_90d - oracle_mrs(corpus.profiles[i]);
    CHECK(std::abs(diff) <= 1);
    shifted += diff != 0;
  }
  CHECK(shifted > 0);
}

TEST_CASE("generate: invalid configs") {
  CHECK_THROWS_AS(generate_corpus(SynthConfig{0}), ConfigError);
  SynthConfig bad;
  bad.noise_level = 3;
  CHECK_THROWS_AS(generate_corpus(bad), ConfigError);
  SynthConfig drift;
  drift.phrasing_bank_version = 2;
  CHECK_THROWS_AS(generate_corpus(drift), ConfigError);
}

TEST_CASE("profiles: JSON round trip") {
  const auto corpus = generate_corpus(SynthConfig{5, 3});
  for (const auto& p : corpus.profiles) CHECK(profile_from_json(json::parse(to_json(p).dump())) == p);
  CHECK(!profiles_jsonl(corpus.profiles).empty());
}
