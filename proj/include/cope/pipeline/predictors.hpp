#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "cope/backends/client.hpp"
#include "cope/corpus/patient.hpp"
#include "cope/features/svr.hpp"
#include "cope/pipeline/prediction.hpp"
#include "cope/pipeline/template.hpp"

namespace cope::pipeline {

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Engine engine() const = 0;
  /// Throws DataError when the note is empty, before any backend call.
  /// Backend and parse failures are reported in the record's status.
  virtual PredictionRecord predict(const corpus::PatientRecord& record) = 0;
  /// Template hashes by template name.
  virtual std::map<std::string, std::string> template_hashes() const { return {}; }
  /// Redacted backend configuration, or null.
  virtual ojson backend_snapshot() const { return nullptr; }
};

/// Extraction retries raise the temperature by this much per attempt.
inline constexpr double kRetryTemperatureStep = 0.2;

struct LlmOptions {
  /// Token budget for the reasoning step (COPE) or the single call
  /// (single-step). Defaults to the backend's max_tokens.
  std::optional<int> primary_max_tokens;
  int extraction_max_tokens = backends::kExtractionMaxTokens;
  /// Parse-failure retries. Defaults to the backend's max_retries.
  std::optional<int> parse_retries;
};

/// Two steps: reasoning over the full note, then score extraction over the
/// reasoning text alone.
class CopePredictor : public Predictor {
 public:
  CopePredictor(std::shared_ptr<backends::ChatClient> reasoning_client,
                std::shared_ptr<backends::ChatClient> extraction_client, PromptTemplate reasoning,
                PromptTemplate extraction, LlmOptions options = {});

  Engine engine() const override { return Engine::cope; }
  PredictionRecord predict(const corpus::PatientRecord& record) override;
  std::map<std::string, std::string> template_hashes() const override;
  ojson backend_snapshot() const override;

 private:
  std::shared_ptr<backends::ChatClient> reasoning_client_;
  std::shared_ptr<backends::ChatClient> extraction_client_;
  PromptTemplate reasoning_;
  PromptTemplate extraction_;
  LlmOptions options_;
};

/// One call straight from the note to a score.
class SingleStepPredictor : public Predictor {
 public:
  SingleStepPredictor(std::shared_ptr<backends::ChatClient> client, PromptTemplate tpl, LlmOptions options = {});

  Engine engine() const override { return Engine::single_step; }
  PredictionRecord predict(const corpus::PatientRecord& record) override;
  std::map<std::string, std::string> template_hashes() const override;
  ojson backend_snapshot() const override;

 private:
  std::shared_ptr<backends::ChatClient> client_;
  PromptTemplate template_;
  LlmOptions options_;
};

/// Structured features extracted from the note, encoded, scored by a trained
/// linear SVR.
class ClinicalMlPredictor : public Predictor {
 public:
  explicit ClinicalMlPredictor(features::ClinicalMlModel model);

  Engine engine() const override { return Engine::clinical_ml; }
  PredictionRecord predict(const corpus::PatientRecord& record) override;
  const features::ClinicalMlModel& model() const { return model_; }

 private:
  features::ClinicalMlModel model_;
};

/// Fits the encoder and SVR on labeled records. Throws DataError when fewer
/// than two records carry a label.
features::ClinicalMlModel train_clinical_ml(const corpus::Cohort& training,
                                            const features::SvrHyperparams& hyperparams = {});

}  // namespace cope::pipeline
