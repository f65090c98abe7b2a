#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cope/util/json.hpp"

namespace cope::pipeline {

enum class Engine { cope, single_step, clinical_ml };
enum class PredictionStatus { ok, parse_failed, backend_failed };

std::string_view to_string(Engine engine);
std::string_view to_string(PredictionStatus status);
/// Throws ConfigError on unknown names.
Engine parse_engine(std::string_view name);
PredictionStatus parse_status(std::string_view name);

struct ReasoningArtifact {
  std::string patient_id;
  std::string reasoning_text;
  std::string backend_model;
  double latency_ms = 0.0;
};

struct PredictionRecord {
  std::string patient_id;
  Engine engine = Engine::cope;
  std::optional<int> predicted_mrs;  // present iff status == ok, always in [0, 6]
  std::string raw_extraction_output;
  std::optional<ReasoningArtifact> reasoning;
  int attempts = 1;
  PredictionStatus status = PredictionStatus::ok;
  bool lenient_parse = false;          // value came from the lenient fallback
  std::optional<std::string> parse_error;  // last parse error class, if any
  std::string error_message;           // backend failure detail
  std::optional<double> raw_score;     // clinical_ml regression output
  std::string extraction_prompt;       // exact content sent for the final score
  double extraction_latency_ms = 0.0;
};

/// Stable key order. Timing fields are named "*latency_ms" so diffs can drop
/// them.
ojson to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(const json& j);

}  // namespace cope::pipeline
