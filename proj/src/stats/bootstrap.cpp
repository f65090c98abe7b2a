#include "cope/stats/bootstrap.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

#include "cope/util/quantile.hpp"
#include "cope/util/rng.hpp"

namespace cope::stats {

namespace {

unsigned worker_count(const BootstrapConfig& config) {
  unsigned threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  threads = std::max(1u, threads);
  return std::min<unsigned>(threads, static_cast<unsigned>(std::max(1, config.resamples / 256)));
}

// Runs body(i) for every resample index, split across worker threads.
template <typename Body>
void for_each_resample(const BootstrapConfig& config, Body body) {
  const unsigned workers = worker_count(config);
  const auto total = static_cast<std::size_t>(config.resamples);
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (total + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(total, begin + chunk);
    pool.emplace_back([=, &body] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

void draw_indices(std::uint64_t seed, std::size_t i, std::size_t n, std::vector<std::size_t>& idx) {
  SplitMix64 rng(substream_seed(seed, i));
  idx.resize(n);
  for (auto& k : idx) k = rng.below(n);
}

void check_config(const BootstrapConfig& config) {
  if (config.resamples < 1) throw std::invalid_argument("bootstrap needs at least one resample");
}

}  // namespace

std::vector<double> bootstrap_distribution(const PairedOutcomes& outcomes, const MetricFn& metric,
                                           const BootstrapConfig& config) {
  check_config(config);
  const std::size_t n = outcomes.size();
  std::vector<double> values(static_cast<std::size_t>(config.resamples));
  const auto& t = outcomes.y_true();
  const auto& p = outcomes.y_pred();
  for_each_resample(config, [&](std::size_t i) {
    thread_local std::vector<std::size_t> idx;
    thread_local std::vector<int> rt, rp;
    draw_indices(config.seed, i, n, idx);
    rt.resize(n);
    rp.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      rt[k] = t[idx[k]];
      rp[k] = p[idx[k]];
    }
    values[i] = metric(rt, rp);
  });
  return values;
}

Interval bootstrap_ci(const PairedOutcomes& outcomes, const MetricFn& metric, const BootstrapConfig& config) {
  if (outcomes.size() < 2) throw std::invalid_argument("bootstrap CI needs at least two patients");
  if (config.resamples < 100) throw std::invalid_argument("bootstrap CI needs at least 100 resamples");
  std::vector<double> values = bootstrap_distribution(outcomes, metric, config);
  std::sort(values.begin(), values.end());
  std::span<const double> sorted(values);
  return {nearest_rank(sorted, 25, 1000), nearest_rank(sorted, 975, 1000)};
}

double paired_bootstrap_test(const PairedOutcomes& a, const PairedOutcomes& b, const MetricFn& metric,
                             const BootstrapConfig& config) {
  check_config(config);
  if (a.ids() != b.ids()) throw std::invalid_argument("paired test: arms cover different patient ids");
  if (a.y_true() != b.y_true()) throw std::invalid_argument("paired test: arms disagree on ground truth");
  const std::size_t n = a.size();
  std::vector<double> deltas(static_cast<std::size_t>(config.resamples));
  for_each_resample(config, [&](std::size_t i) {
    thread_local std::vector<std::size_t> idx;
    thread_local std::vector<int> rt, ra, rb;
    draw_indices(config.seed, i, n, idx);
    rt.resize(n);
    ra.resize(n);
    rb.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      rt[k] = a.y_true()[idx[k]];
      ra[k] = a.y_pred()[idx[k]];
      rb[k] = b.y_pred()[idx[k]];
    }
    deltas[i] = metric(rt, ra) - metric(rt, rb);
  });
  std::size_t at_most_zero = 0, at_least_zero = 0;
  for (double d : deltas) {
    if (d <= 0.0) ++at_most_zero;
    if (d >= 0.0) ++at_least_zero;
  }
  const double tail = static_cast<double>(std::min(at_most_zero, at_least_zero) + 1);
  return std::min(1.0, 2.0 * tail / static_cast<double>(config.resamples + 1));
}

namespace {
MetricEstimate estimate(const PairedOutcomes& o, Metric m, const BootstrapConfig& config) {
  MetricEstimate e;
  const MetricFn fn = metric_fn(m);
  e.point = fn(o.y_true(), o.y_pred());
  if (o.size() >= 2) e.ci_95 = bootstrap_ci(o, fn, config);
  return e;
}

ojson estimate_json(const MetricEstimate& e) {
  ojson j;
  j["point"] = e.point;
  j["ci_lo"] = e.ci_95 ? ojson(e.ci_95->lo) : ojson(nullptr);
  j["ci_hi"] = e.ci_95 ? ojson(e.ci_95->hi) : ojson(nullptr);
  return j;
}

MetricEstimate estimate_from_json(const json& j) {
  MetricEstimate e;
  e.point = j.at("point").get<double>();
  if (!j.at("ci_lo").is_null()) e.ci_95 = Interval{j["ci_lo"].get<double>(), j.at("ci_hi").get<double>()};
  return e;
}
}  // namespace

MetricReport metric_report(const std::string& model, const PairedOutcomes& outcomes, std::size_t excluded,
                           const BootstrapConfig& config) {
  MetricReport r;
  r.model = model;
  r.n = outcomes.size();
  r.excluded = excluded;
  r.bootstrap = config;
  r.mae = estimate(outcomes, Metric::mae, config);
  r.acc = estimate(outcomes, Metric::acc, config);
  r.within1_acc = estimate(outcomes, Metric::within1_acc, config);
  return r;
}

ojson to_json(const MetricReport& r) {
  ojson j;
  j["model"] = r.model;
  j["n"] = r.n;
  j["excluded"] = r.excluded;
  j["bootstrap"] = ojson{{"resamples", r.bootstrap.resamples}, {"seed", r.bootstrap.seed}};
  j["mae"] = estimate_json(r.mae);
  j["acc"] = estimate_json(r.acc);
  j["within1_acc"] = estimate_json(r.within1_acc);
  return j;
}

MetricReport metric_report_from_json(const json& j) {
  MetricReport r;
  r.model = j.at("model").get<std::string>();
  r.n = j.at("n").get<std::size_t>();
  r.excluded = j.at("excluded").get<std::size_t>();
  r.bootstrap.resamples = j.at("bootstrap").at("resamples").get<int>();
  r.bootstrap.seed = j.at("bootstrap").at("seed").get<std::uint64_t>();
  r.mae = estimate_from_json(j.at("mae"));
  r.acc = estimate_from_json(j.at("acc"));
  r.within1_acc = estimate_from_json(j.at("within1_acc"));
  return r;
}

}  // namespace cope::stats
