#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cope/features/encode.hpp"
#include "cope/pipeline/prediction.hpp"
#include "cope/util/json.hpp"

namespace cope::features {

struct SvrHyperparams {
  double c = 1.0;
  double epsilon = 0.5;
  int epochs = 400;
  double learning_rate = 0.1;
  std::uint64_t seed = 17;
};

/// Linear epsilon-insensitive support vector regression.
struct SvrModel {
  std::vector<double> weights;
  double bias = 0.0;
  SvrHyperparams hyperparams;
  std::int64_t iterations = 0;
  /// Objective of the retained iterate after each epoch.
  std::vector<double> objective_trace;

  double final_objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
  double raw_score(std::span<const double> row) const;
};

/// (1/2)|w|^2 + C * sum max(0, |y - (w.x + b)| - epsilon)
double svr_objective(const SvrModel& model, const std::vector<std::vector<double>>& rows,
                     std::span<const double> labels);

/// Seeded stochastic subgradient descent with a 1/sqrt(epoch) step schedule.
/// Each epoch visits every row once in a seeded order; the best iterate seen
/// at an epoch boundary is kept, so the recorded objective never increases.
/// Throws std::invalid_argument for fewer than two rows, mismatched sizes or
/// non-finite inputs.
SvrModel train_svr(const FeatureMatrix& matrix, std::span<const double> labels,
                   const SvrHyperparams& hyperparams = {});
SvrModel train_svr(const std::vector<std::vector<double>>& rows, std::span<const double> labels,
                   const SvrHyperparams& hyperparams = {});

/// Round half to even.
double round_half_even(double x);

/// clamp(round_half_even(raw), 0, 6)
int score_to_mrs(double raw);

/// Scores one encoded row. Throws std::invalid_argument on width mismatch.
pipeline::PredictionRecord predict_clinical_ml(const SvrModel& model, std::span<const double> row,
                                               const std::string& patient_id);

/// Encoder plus regressor, persisted together so the column layout travels
/// with the weights.
struct ClinicalMlModel {
  FeatureEncoder encoder;
  SvrModel svr;

  ojson to_json() const;
  static ClinicalMlModel from_json(const json& j);
};

ojson to_json(const SvrModel& model);
SvrModel svr_from_json(const json& j);

}  // namespace cope::features
