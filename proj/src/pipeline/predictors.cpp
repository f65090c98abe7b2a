#include "cope/pipeline/predictors.hpp"

#include <chrono>

#include "cope/features/extract.hpp"
#include "cope/pipeline/parse.hpp"
#include "cope/util/error.hpp"

namespace cope::pipeline {

namespace {

void require_note(const corpus::PatientRecord& record) {
  if (record.note_text.empty()) throw DataError("patient " + record.id + " has an empty note");
}


// Sends `request` up to 1 + retries times, raising the temperature after each
// unparseable answer. Fills score, status and audit fields of `out`.
void score_with_retries(backends::ChatClient& client, backends::ChatRequest request, int retries,
                        PredictionRecord& out) {
  const double base_temperature = request.params.temperature;
  for (int attempt = 1; attempt <= retries + 1; ++attempt) {
    request.params.temperature = base_temperature + kRetryTemperatureStep * (attempt - 1);
    out.attempts = attempt;
    out.extraction_prompt = request.joined_content();
    backends::ChatResponse response;
    try {
      response = client.complete(request);
    } catch (const backends::BackendError& e) {
      out.status = PredictionStatus::backend_failed;
      out.error_message = e.what();
      return;
    }
    out.raw_extraction_output = response.content;
    out.extraction_latency_ms = static_cast<double>(response.latency.count());
    const ParseOutcome parsed = parse_mrs(response.content);
    if (parsed.ok()) {
      out.predicted_mrs = *parsed.value;
      out.lenient_parse = parsed.lenient;
      out.parse_error.reset();
      out.status = PredictionStatus::ok;
      return;
    }
    out.parse_error = std::string(to_string(*parsed.error));
  }
  out.status = PredictionStatus::parse_failed;
}

backends::SamplingParams params_for(const backends::ChatClient& client, std::optional<int> max_tokens) {
  return {client.config().temperature, max_tokens.value_or(client.config().max_tokens)};
}

}  // namespace

CopePredictor::CopePredictor(std::shared_ptr<backends::ChatClient> reasoning_client,
                             std::shared_ptr<backends::ChatClient> extraction_client, PromptTemplate reasoning,
                             PromptTemplate extraction, LlmOptions options)
    : reasoning_client_(std::move(reasoning_client)),
      extraction_client_(std::move(extraction_client)),
      reasoning_(std::move(reasoning)),
      extraction_(std::move(extraction)),
      options_(options) {
  if (!reasoning_client_ || !extraction_client_) throw ConfigError("COPE predictor needs two backend clients");
  if (reasoning_.placeholders != std::set<std::string>{std::string(kSummaryPlaceholder)}) {
    throw ConfigError("reasoning template must use exactly {{discharge_summary}}");
  }
  if (extraction_.placeholders != std::set<std::string>{std::string(kReasoningPlaceholder)}) {
    throw ConfigError("extraction template must use exactly {{reasoning_text}}");
  }
}

PredictionRecord CopePredictor::predict(const corpus::PatientRecord& record) {
  require_note(record);
  PredictionRecord out;
  out.patient_id = record.id;
  out.engine = Engine::cope;

  const auto reasoning_request = render_prompt(reasoning_, {{std::string(kSummaryPlaceholder), record.note_text}},
                                               params_for(*reasoning_client_, options_.primary_max_tokens));
  backends::ChatResponse reasoning;
  try {
    reasoning = reasoning_client_->complete(reasoning_request);
  } catch (const backends::BackendError& e) {
    out.status = PredictionStatus::backend_failed;
    out.error_message = e.what();
    return out;
  }
  out.reasoning = ReasoningArtifact{record.id, reasoning.content, reasoning_client_->config().model_name,
                                    static_cast<double>(reasoning.latency.count())};
  if (reasoning.content.empty()) {
    out.status = PredictionStatus::backend_failed;
    out.error_message = "reasoning step returned empty text";
    return out;
  }

  const auto extraction_request =
      render_prompt(extraction_, {{std::string(kReasoningPlaceholder), reasoning.content}},
                    {extraction_client_->config().temperature, options_.extraction_max_tokens});
  score_with_retries(*extraction_client_, extraction_request,
                     options_.parse_retries.value_or(extraction_client_->config().max_retries), out);
  return out;
}

std::map<std::string, std::string> CopePredictor::template_hashes() const {
  return {{reasoning_.name, reasoning_.hash()}, {extraction_.name, extraction_.hash()}};
}

ojson CopePredictor::backend_snapshot() const {
  return ojson{{"reasoning", backends::to_json(reasoning_client_->config())},
               {"extraction", backends::to_json(extraction_client_->config())}};
}

SingleStepPredictor::SingleStepPredictor(std::shared_ptr<backends::ChatClient> client, PromptTemplate tpl,
                                         LlmOptions options)
    : client_(std::move(client)), template_(std::move(tpl)), options_(options) {
  if (!client_) throw ConfigError("single-step predictor needs a backend client");
  if (template_.placeholders != std::set<std::string>{std::string(kSummaryPlaceholder)}) {
    throw ConfigError("single-step template must use exactly {{discharge_summary}}");
  }
}

PredictionRecord SingleStepPredictor::predict(const corpus::PatientRecord& record) {
  require_note(record);
  PredictionRecord out;
  out.patient_id = record.id;
  out.engine = Engine::single_step;
  const auto request = render_prompt(template_, {{std::string(kSummaryPlaceholder), record.note_text}},
                                     params_for(*client_, options_.primary_max_tokens));
  score_with_retries(*client_, request, options_.parse_retries.value_or(client_->config().max_retries), out);
  return out;
}

std::map<std::string, std::string> SingleStepPredictor::template_hashes() const {
  return {{template_.name, template_.hash()}};
}

ojson SingleStepPredictor::backend_snapshot() const { return backends::to_json(client_->config()); }

ClinicalMlPredictor::ClinicalMlPredictor(features::ClinicalMlModel model) : model_(std::move(model)) {}

PredictionRecord ClinicalMlPredictor::predict(const corpus::PatientRecord& record) {
  require_note(record);
  const auto f = features::extract_features(record.note_text, record.structured_overrides);
  const auto row = model_.encoder.transform_row(f);
  return features::predict_clinical_ml(model_.svr, row, record.id);
}

features::ClinicalMlModel train_clinical_ml(const corpus::Cohort& training,
                                            const features::SvrHyperparams& hyperparams) {
  std::vector<features::StructuredFeatures> rows;
  std::vector<double> labels;
  for (const auto& r : training.records()) {
    if (!r.mrs_90d) continue;
    rows.push_back(features::extract_features(r.note_text, r.structured_overrides));
    labels.push_back(*r.mrs_90d);
  }
  if (rows.size() < 2) throw DataError("clinical ML training needs at least two labeled records");
  features::ClinicalMlModel model;
  model.encoder = features::FeatureEncoder::fit(rows);
  model.svr = features::train_svr(model.encoder.transform(rows), labels, hyperparams);
  return model;
}

}  // namespace cope::pipeline
