#include "cope/pipeline/prediction.hpp"

#include "cope/util/error.hpp"

namespace cope::pipeline {

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::cope: return "cope";
    case Engine::single_step: return "single_step";
    case Engine::clinical_ml: return "clinical_ml";
  }
  return "?";
}

std::string_view to_string(PredictionStatus status) {
  switch (status) {
    case PredictionStatus::ok: return "ok";
    case PredictionStatus::parse_failed: return "parse_failed";
    case PredictionStatus::backend_failed: return "backend_failed";
  }
  return "?";
}

Engine parse_engine(std::string_view name) {
  for (Engine e : {Engine::cope, Engine::single_step, Engine::clinical_ml}) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError("unknown engine \"" + std::string(name) + "\" (expected cope, single_step or clinical_ml)");
}

PredictionStatus parse_status(std::string_view name) {
  for (auto s : {PredictionStatus::ok, PredictionStatus::parse_failed, PredictionStatus::backend_failed}) {
    if (to_string(s) == name) return s;
  }
  throw DataError("unknown prediction status \"" + std::string(name) + "\"");
}

ojson to_json(const PredictionRecord& r) {
  ojson j;
  j["patient_id"] = r.patient_id;
  j["engine"] = to_string(r.engine);
  j["status"] = to_string(r.status);
  j["predicted_mrs"] = r.predicted_mrs ? ojson(*r.predicted_mrs) : ojson(nullptr);
  j["attempts"] = r.attempts;
  j["lenient_parse"] = r.lenient_parse;
  j["parse_error"] = r.parse_error ? ojson(*r.parse_error) : ojson(nullptr);
  j["error_message"] = r.error_message;
  j["raw_extraction_output"] = r.raw_extraction_output;
  j["raw_score"] = r.raw_score ? ojson(*r.raw_score) : ojson(nullptr);
  if (r.reasoning) {
    j["reasoning_ref"] = ojson{{"patient_id", r.reasoning->patient_id},
                               {"backend_model", r.reasoning->backend_model},
                               {"reasoning_text", r.reasoning->reasoning_text},
                               {"latency_ms", r.reasoning->latency_ms}};
  } else {
    j["reasoning_ref"] = nullptr;
  }
  j["extraction_prompt"] = r.extraction_prompt;
  j["extraction_latency_ms"] = r.extraction_latency_ms;
  return j;
}

PredictionRecord prediction_from_json(const json& j) {
  PredictionRecord r;
  try {
    r.patient_id = j.at("patient_id").get<std::string>();
    r.engine = parse_engine(j.at("engine").get<std::string>());
    r.status = parse_status(j.at("status").get<std::string>());
    if (!j.at("predicted_mrs").is_null()) r.predicted_mrs = j["predicted_mrs"].get<int>();
    r.attempts = j.at("attempts").get<int>();
    r.lenient_parse = j.value("lenient_parse", false);
    if (j.contains("parse_error") && !j["parse_error"].is_null()) r.parse_error = j["parse_error"].get<std::string>();
    r.error_message = j.value("error_message", "");
    r.raw_extraction_output = j.value("raw_extraction_output", "");
    if (j.contains("raw_score") && !j["raw_score"].is_null()) r.raw_score = j["raw_score"].get<double>();
    if (j.contains("reasoning_ref") && !j["reasoning_ref"].is_null()) {
      const auto& ref = j["reasoning_ref"];
      r.reasoning = ReasoningArtifact{ref.at("patient_id").get<std::string>(),
                                      ref.at("reasoning_text").get<std::string>(),
                                      ref.value("backend_model", ""), ref.value("latency_ms", 0.0)};
    }
    r.extraction_prompt = j.value("extraction_prompt", "");
    r.extraction_latency_ms = j.value("extraction_latency_ms", 0.0);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed prediction record: ") + e.what());
  }
  if ((r.status == PredictionStatus::ok) != r.predicted_mrs.has_value() ||
      (r.predicted_mrs && (*r.predicted_mrs < 0 || *r.predicted_mrs > 6))) {
    throw DataError("prediction record for " + r.patient_id + " violates the status/score contract");
  }
  return r;
}

}  // namespace cope::pipeline
