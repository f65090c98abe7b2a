#pragma once

#include <span>
#include <string>
#include <vector>

#include "cope/stats/bootstrap.hpp"

namespace cope::stats {

/// Benjamini-Hochberg step-up at level q. Returns decisions in input order.
/// Throws std::invalid_argument for p outside (0, 1] or q outside (0, 1).
std::vector<bool> benjamini_hochberg(std::span<const double> p_values, double q);

struct MetricComparison {
  Metric metric = Metric::mae;
  double delta = 0.0;  // metric(a) - metric(b)
  double p_value = 1.0;
  bool reject = false;  // BH decision across the whole family
};

struct ComparisonResult {
  std::string model_a;
  std::string model_b;
  std::size_t n = 0;
  std::vector<MetricComparison> metrics;
};

/// Compares `a` with every entry of `others` on each metric in `family`; the
/// BH correction spans all (other, metric) pairs.
std::vector<ComparisonResult> compare_models(const std::string& name_a, const PairedOutcomes& a,
                                             const std::vector<std::pair<std::string, PairedOutcomes>>& others,
                                             const std::vector<Metric>& family, const BootstrapConfig& config,
                                             double q = 0.05);

ojson to_json(const ComparisonResult& result);

}  // namespace cope::stats
