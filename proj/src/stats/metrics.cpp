#include "cope/stats/metrics.hpp"

#include <cstdlib>
#include <stdexcept>

namespace cope::stats {

PairedOutcomes::PairedOutcomes(std::vector<std::string> ids, std::vector<int> y_true, std::vector<int> y_pred)
    : ids_(std::move(ids)), y_true_(std::move(y_true)), y_pred_(std::move(y_pred)) {
  if (ids_.empty()) throw std::invalid_argument("paired outcomes need at least one patient");
  if (ids_.size() != y_true_.size() || ids_.size() != y_pred_.size()) {
    throw std::invalid_argument("paired outcomes: ids, y_true and y_pred differ in length");
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (y_true_[i] < 0 || y_true_[i] > 6 || y_pred_[i] < 0 || y_pred_[i] > 6) {
      throw std::invalid_argument("paired outcomes: score outside [0, 6] for " + ids_[i]);
    }
  }
}

PairedOutcomes PairedOutcomes::select(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<int> t, p;
  for (std::size_t r : rows) {
    ids.push_back(ids_.at(r));
    t.push_back(y_true_[r]);
    p.push_back(y_pred_[r]);
  }
  return PairedOutcomes(std::move(ids), std::move(t), std::move(p));
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::mae: return "mae";
    case Metric::acc: return "acc";
    case Metric::within1_acc: return "within1_acc";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  if (name == "mae") return Metric::mae;
  if (name == "acc") return Metric::acc;
  if (name == "within1_acc" || name == "within1") return Metric::within1_acc;
  throw std::invalid_argument("unknown metric \"" + std::string(name) + "\"");
}

bool lower_is_better(Metric metric) { return metric == Metric::mae; }

namespace {
void check(std::span<const int> t, std::span<const int> p) {
  if (t.empty()) throw std::invalid_argument("metric of empty outcomes");
  if (t.size() != p.size()) throw std::invalid_argument("metric: length mismatch");
}
}  // namespace

double mae(std::span<const int> t, std::span<const int> p) {
  check(t, p);
  long long sum = 0;
  for (std::size_t i = 0; i < t.size(); ++i) sum += std::abs(p[i] - t[i]);
  return static_cast<double>(sum) / static_cast<double>(t.size());
}

double exact_acc(std::span<const int> t, std::span<const int> p) {
  check(t, p);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < t.size(); ++i) hits += p[i] == t[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(t.size());
}

double within1_acc(std::span<const int> t, std::span<const int> p) {
  check(t, p);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < t.size(); ++i) hits += std::abs(p[i] - t[i]) <= 1 ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(t.size());
}

double mae(const PairedOutcomes& o) { return mae(o.y_true(), o.y_pred()); }
double exact_acc(const PairedOutcomes& o) { return exact_acc(o.y_true(), o.y_pred()); }
double within1_acc(const PairedOutcomes& o) { return within1_acc(o.y_true(), o.y_pred()); }

MetricFn metric_fn(Metric metric) {
  switch (metric) {
    case Metric::mae: return [](std::span<const int> t, std::span<const int> p) { return mae(t, p); };
    case Metric::acc: return [](std::span<const int> t, std::span<const int> p) { return exact_acc(t, p); };
    case Metric::within1_acc:
      return [](std::span<const int> t, std::span<const int> p) { return within1_acc(t, p); };
  }
  throw std::invalid_argument("unknown metric");
}

}  // namespace cope::stats
