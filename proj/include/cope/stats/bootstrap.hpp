#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cope/stats/metrics.hpp"
#include "cope/util/json.hpp"

namespace cope::stats {

struct BootstrapConfig {
  int resamples = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Metric value on each of `config.resamples` resamples of patient indices.
/// Resample i draws from substream_seed(seed, i), so the values do not depend
/// on the thread count.
std::vector<double> bootstrap_distribution(const PairedOutcomes& outcomes, const MetricFn& metric,
                                           const BootstrapConfig& config);

/// Percentile interval: nearest-rank 2.5th and 97.5th percentiles of the
/// bootstrap distribution. Throws std::invalid_argument for n < 2 or fewer
/// than 100 resamples.
Interval bootstrap_ci(const PairedOutcomes& outcomes, const MetricFn& metric, const BootstrapConfig& config);

/// Two-sided paired bootstrap test. Both arms are resampled with the same
/// indices; with D_i = metric(a) - metric(b) on resample i,
/// p = min(1, 2 * min(#{D_i <= 0} + 1, #{D_i >= 0} + 1) / (B + 1)).
/// Throws std::invalid_argument when the arms differ in ids or ground truth.
double paired_bootstrap_test(const PairedOutcomes& a, const PairedOutcomes& b, const MetricFn& metric,
                             const BootstrapConfig& config);

struct MetricEstimate {
  double point = 0.0;
  std::optional<Interval> ci_95;  // absent when n < 2
};

struct MetricReport {
  std::string model;
  std::size_t n = 0;
  std::size_t excluded = 0;  // failed predictions left out of the outcomes
  MetricEstimate mae;
  MetricEstimate acc;
  MetricEstimate within1_acc;
  BootstrapConfig bootstrap;
};

MetricReport metric_report(const std::string& model, const PairedOutcomes& outcomes, std::size_t excluded,
                           const BootstrapConfig& config);

ojson to_json(const MetricReport& report);
MetricReport metric_report_from_json(const json& j);

}  // namespace cope::stats
