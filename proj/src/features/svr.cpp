#include "cope/features/svr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cope/util/rng.hpp"

namespace cope::features {

double SvrModel::raw_score(std::span<const double> row) const {
  if (row.size() != weights.size()) {
    throw std::invalid_argument("row width " + std::to_string(row.size()) + " does not match model width " +
                                std::to_string(weights.size()));
  }
  return std::inner_product(row.begin(), row.end(), weights.begin(), bias);
}

double svr_objective(const SvrModel& model, const std::vector<std::vector<double>>& rows,
                     std::span<const double> labels) {
  double reg = 0.0;
  for (double w : model.weights) reg += w * w;
  double loss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double r = std::abs(labels[i] - model.raw_score(rows[i]));
    loss += std::max(0.0, r - model.hyperparams.epsilon);
  }
  return 0.5 * reg + model.hyperparams.c * loss;
}

SvrModel train_svr(const std::vector<std::vector<double>>& rows, std::span<const double> labels,
                   const SvrHyperparams& hp) {
  const std::size_t n = rows.size();
  if (n < 2) throw std::invalid_argument("train_svr needs at least two rows");
  if (labels.size() != n) throw std::invalid_argument("train_svr: labels and rows differ in length");
  if (!(hp.c > 0.0) || !(hp.epsilon >= 0.0) || hp.epochs < 1 || !(hp.learning_rate > 0.0)) {
    throw std::invalid_argument("train_svr: invalid hyperparameters");
  }
  const std::size_t width = rows.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != width) throw std::invalid_argument("train_svr: ragged feature matrix");
    for (double v : rows[i]) {
      if (!std::isfinite(v)) throw std::invalid_argument("train_svr: non-finite value in row " + std::to_string(i));
    }
    if (!std::isfinite(labels[i])) throw std::invalid_argument("train_svr: non-finite label");
  }

  SvrModel current;
  current.hyperparams = hp;
  current.weights.assign(width, 0.0);
  {
    std::vector<double> sorted(labels.begin(), labels.end());
    std::sort(sorted.begin(), sorted.end());
    current.bias = sorted[(n - 1) / 2];
  }
  SvrModel best = current;
  double best_objective = svr_objective(current, rows, labels);

  // Work on the objective divided by n*C so the step size is independent of
  // C and the sample count: |w|^2 / (2nC) + mean epsilon-insensitive loss.
  const double reg_scale = 1.0 / (static_cast<double>(n) * hp.c);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(hp.seed);
  std::int64_t steps = 0;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    seeded_shuffle(std::span<std::size_t>(order), rng);
    const double eta = hp.learning_rate / std::sqrt(1.0 + epoch);
    for (std::size_t i : order) {
      const double residual = labels[i] - current.raw_score(rows[i]);
      double push = 0.0;
      if (residual > hp.epsilon) push = 1.0;
      if (residual < -hp.epsilon) push = -1.0;
      for (std::size_t k = 0; k < width; ++k) {
        current.weights[k] -= eta * (reg_scale * current.weights[k] - push * rows[i][k]);
      }
      current.bias += eta * push;
      ++steps;
    }
    const double objective = svr_objective(current, rows, labels);
    if (objective < best_objective) {
      best_objective = objective;
      best.weights = current.weights;
      best.bias = current.bias;
    }
    best.objective_trace.push_back(best_objective);
  }
  best.iterations = steps;
  return best;
}

SvrModel train_svr(const FeatureMatrix& matrix, std::span<const double> labels, const SvrHyperparams& hp) {
  return train_svr(matrix.rows, labels, hp);
}

double round_half_even(double x) {
  const double lower = std::floor(x);
  const double diff = x - lower;
  if (diff > 0.5) return lower + 1.0;
  if (diff < 0.5) return lower;
  return std::fmod(lower, 2.0) == 0.0 ? lower : lower + 1.0;
}

int score_to_mrs(double raw) {
  if (!std::isfinite(raw)) return raw > 0 ? 6 : 0;
  return static_cast<int>(std::clamp(round_half_even(raw), 0.0, 6.0));
}

pipeline::PredictionRecord predict_clinical_ml(const SvrModel& model, std::span<const double> row,
                                               const std::string& patient_id) {
  const double raw = model.raw_score(row);
  pipeline::PredictionRecord rec;
  rec.patient_id = patient_id;
  rec.engine = pipeline::Engine::clinical_ml;
  rec.status = pipeline::PredictionStatus::ok;
  rec.predicted_mrs = score_to_mrs(raw);
  rec.raw_score = raw;
  std::ostringstream text;
  text.precision(17);
  text << raw;
  rec.raw_extraction_output = text.str();
  return rec;
}

ojson to_json(const SvrModel& m) {
  return ojson{{"weights", m.weights},
               {"bias", m.bias},
               {"hyperparams",
                {{"c", m.hyperparams.c},
                 {"epsilon", m.hyperparams.epsilon},
                 {"epochs", m.hyperparams.epochs},
                 {"learning_rate", m.hyperparams.learning_rate},
                 {"seed", m.hyperparams.seed}}},
               {"iterations", m.iterations},
               {"objective_trace", m.objective_trace}};
}

SvrModel svr_from_json(const json& j) {
  SvrModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  const auto& hp = j.at("hyperparams");
  m.hyperparams.c = hp.at("c").get<double>();
  m.hyperparams.epsilon = hp.at("epsilon").get<double>();
  m.hyperparams.epochs = hp.at("epochs").get<int>();
  m.hyperparams.learning_rate = hp.at("learning_rate").get<double>();
  m.hyperparams.seed = hp.at("seed").get<std::uint64_t>();
  m.iterations = j.value("iterations", std::int64_t{0});
  m.objective_trace = j.value("objective_trace", std::vector<double>{});
  return m;
}

ojson ClinicalMlModel::to_json() const {
  return ojson{{"encoder", encoder.to_json()}, {"svr", features::to_json(svr)}};
}

ClinicalMlModel ClinicalMlModel::from_json(const json& j) {
  ClinicalMlModel m;
  m.encoder = FeatureEncoder::from_json(j.at("encoder"));
  m.svr = svr_from_json(j.at("svr"));
  if (m.svr.weights.size() != m.encoder.columns().size()) {
    throw std::invalid_argument("clinical ML model: weight count does not match column spec");
  }
  return m;
}

}  // namespace cope::features
