#include "cope/stats/fdr.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace cope::stats {

std::vector<bool> benjamini_hochberg(std::span<const double> p_values, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("BH level q must lie in (0, 1)");
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p-value outside (0, 1]: " + std::to_string(p));
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::size_t k = 0;  // number rejected
  for (std::size_t rank = m; rank >= 1; --rank) {
    if (p_values[order[rank - 1]] <= static_cast<double>(rank) * q / static_cast<double>(m)) {
      k = rank;
      break;
    }
  }
  std::vector<bool> reject(m, false);
  for (std::size_t r = 0; r < k; ++r) reject[order[r]] = true;
  return reject;
}

std::vector<ComparisonResult> compare_models(const std::string& name_a, const PairedOutcomes& a,
                                             const std::vector<std::pair<std::string, PairedOutcomes>>& others,
                                             const std::vector<Metric>& family, const BootstrapConfig& config,
                                             double q) {
  std::vector<ComparisonResult> results;
  std::vector<double> p_values;
  for (const auto& [name_b, b] : others) {
    ComparisonResult r;
    r.model_a = name_a;
    r.model_b = name_b;
    r.n = a.size();
    for (Metric m : family) {
      const MetricFn fn = metric_fn(m);
      MetricComparison c;
      c.metric = m;
      c.delta = fn(a.y_true(), a.y_pred()) - fn(b.y_true(), b.y_pred());
      c.p_value = paired_bootstrap_test(a, b, fn, config);
      p_values.push_back(c.p_value);
      r.metrics.push_back(c);
    }
    results.push_back(std::move(r));
  }
  const std::vector<bool> decisions = benjamini_hochberg(p_values, q);
  std::size_t k = 0;
  for (auto& r : results) {
    for (auto& c : r.metrics) c.reject = decisions[k++];
  }
  return results;
}

ojson to_json(const ComparisonResult& r) {
  ojson metrics = ojson::array();
  for (const auto& c : r.metrics) {
    metrics.push_back(ojson{{"metric", to_string(c.metric)},
                            {"delta", c.delta},
                            {"p_value", c.p_value},
                            {"bh_reject", c.reject}});
  }
  return ojson{{"model_a", r.model_a}, {"model_b", r.model_b}, {"n", r.n}, {"metrics", metrics}};
}

}  // namespace cope::stats
