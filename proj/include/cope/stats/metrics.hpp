#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cope::stats {

/// Ground truth and predictions aligned by patient. All scores in [0, 6].
class PairedOutcomes {
 public:
  PairedOutcomes() = default;
  /// Throws std::invalid_argument on empty input, unequal lengths or scores
  /// outside [0, 6].
  PairedOutcomes(std::vector<std::string> ids, std::vector<int> y_true, std::vector<int> y_pred);

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<int>& y_true() const { return y_true_; }
  const std::vector<int>& y_pred() const { return y_pred_; }
  std::size_t size() const { return ids_.size(); }

  /// Rows whose position is listed in `rows`, in that order.
  PairedOutcomes select(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> ids_;
  std::vector<int> y_true_;
  std::vector<int> y_pred_;
};

enum class Metric { mae, acc, within1_acc };

std::string_view to_string(Metric metric);
/// Accepts "mae", "acc", "within1_acc" (or "within1"). Throws std::invalid_argument.
Metric parse_metric(std::string_view name);
/// Lower is better only for MAE.
bool lower_is_better(Metric metric);

using MetricFn = std::function<double(std::span<const int> y_true, std::span<const int> y_pred)>;

double mae(std::span<const int> y_true, std::span<const int> y_pred);
double exact_acc(std::span<const int> y_true, std::span<const int> y_pred);
double within1_acc(std::span<const int> y_true, std::span<const int> y_pred);

double mae(const PairedOutcomes& outcomes);
double exact_acc(const PairedOutcomes& outcomes);
double within1_acc(const PairedOutcomes& outcomes);

MetricFn metric_fn(Metric metric);

}  // namespace cope::stats
