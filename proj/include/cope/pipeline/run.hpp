#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cope/corpus/patient.hpp"
#include "cope/pipeline/prediction.hpp"
#include "cope/pipeline/predictors.hpp"

namespace cope::pipeline {

struct StatusCounts {
  std::size_t ok = 0;
  std::size_t parse_failed = 0;
  std::size_t backend_failed = 0;
  std::size_t total() const { return ok + parse_failed + backend_failed; }
};

struct RunManifest {
  std::string run_id;
  Engine engine = Engine::cope;
  ojson backend = nullptr;  // redacted snapshot
  std::map<std::string, std::string> template_hashes;
  std::string cohort_hash;
  std::optional<std::uint64_t> split_seed;
  std::string subset;
  std::string started_at;
  std::string finished_at;
  std::size_t cohort_size = 0;
  StatusCounts counts;  // over persisted records of this cohort
  std::size_t lenient_parses = 0;
  std::size_t new_predictions = 0;  // records evaluated by this invocation
  bool complete = false;            // every cohort record has a persisted prediction
};

ojson to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const json& j);

struct RunOptions {
  std::filesystem::path run_dir;
  unsigned concurrency = 4;
  /// Stop after this many new predictions (the run is left resumable).
  std::optional<std::size_t> limit;
  /// Checked before each record is started.
  const std::atomic<bool>* cancel = nullptr;
  std::optional<std::uint64_t> split_seed;
  std::string subset;
};

inline constexpr std::string_view kPredictionsFile = "predictions.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kReasoningDir = "reasoning";

/// File-name-safe form of a patient id: characters outside [A-Za-z0-9._-]
/// become '_' and a short hash suffix is added when anything was replaced.
std::string sanitize_id(std::string_view id);

/// Predicts every record not already persisted with status ok, appending one
/// JSON line per record as it completes. At the end predictions.jsonl is
/// rewritten sorted by patient id (one line per id) and manifest.json is
/// written last. Throws IoError when the run directory is locked by another
/// process or cannot be written.
RunManifest run_cohort(const corpus::Cohort& cohort, Predictor& predictor, const RunOptions& options);

/// Persisted predictions, last line per id wins. A malformed line (such as a
/// torn final append) is skipped with a warning.
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& run_dir);
RunManifest load_manifest(const std::filesystem::path& run_dir);

}  // namespace cope::pipeline
