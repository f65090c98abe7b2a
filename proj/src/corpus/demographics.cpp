#include "cope/corpus/demographics.hpp"

#include <algorithm>

#include "cope/util/quantile.hpp"

namespace cope::corpus {

namespace {

double pct(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

std::optional<bool> override_flag(const PatientRecord& r, const char* key) {
  if (!r.structured_overrides.is_object()) return std::nullopt;
  auto it = r.structured_overrides.find(key);
  if (it == r.structured_overrides.end() || !it->is_boolean()) return std::nullopt;
  return it->get<bool>();
}

std::optional<double> override_number(const PatientRecord& r, const char* key) {
  if (!r.structured_overrides.is_object()) return std::nullopt;
  auto it = r.structured_overrides.find(key);
  if (it == r.structured_overrides.end() || !it->is_number()) return std::nullopt;
  return it->get<double>();
}

template <typename Get>
CountRow count_row(const std::vector<const PatientRecord*>& arm, std::string name, Get get) {
  CountRow row;
  row.variable = std::move(name);
  std::size_t present = 0;
  for (const auto* r : arm) {
    std::optional<bool> v = get(*r);
    if (!v) continue;
    ++present;
    if (*v) ++row.count;
  }
  row.percent = pct(row.count, present);
  row.missing_percent = pct(arm.size() - present, arm.size());
  return row;
}

template <typename Get>
MedianRow median_row(const std::vector<const PatientRecord*>& arm, std::string name, Get get) {
  MedianRow row;
  row.variable = std::move(name);
  std::vector<double> values;
  for (const auto* r : arm) {
    if (std::optional<double> v = get(*r)) values.push_back(*v);
  }
  row.missing_percent = pct(arm.size() - values.size(), arm.size());
  if (!values.empty()) {
    std::sort(values.begin(), values.end());
    std::span<const double> s(values);
    row.q1 = nearest_rank(s, 1, 4);
    row.median = nearest_rank(s, 1, 2);
    row.q3 = nearest_rank(s, 3, 4);
  }
  return row;
}

ArmSummary summarize_arm(std::string name, const std::vector<const PatientRecord*>& arm) {
  ArmSummary s;
  s.arm = std::move(name);
  s.n = arm.size();
  s.counts.push_back(count_row(arm, "male", [](const PatientRecord& r) -> std::optional<bool> {
    if (!r.sex) return std::nullopt;
    return *r.sex == Sex::male;
  }));
  s.counts.push_back(count_row(arm, "hypertension", [](const auto& r) { return override_flag(r, "hypertension"); }));
  s.counts.push_back(count_row(arm, "diabetes", [](const auto& r) { return override_flag(r, "diabetes"); }));
  s.counts.push_back(count_row(arm, "iv_tpa", [](const auto& r) { return override_flag(r, "iv_tpa"); }));
  s.counts.push_back(count_row(arm, "evt", [](const PatientRecord& r) {
    return r.evt ? r.evt : override_flag(r, "evt");
  }));
  s.medians.push_back(median_row(arm, "age_years", [](const PatientRecord& r) -> std::optional<double> {
    if (r.age_years) return static_cast<double>(*r.age_years);
    return override_number(r, "age_years");
  }));
  s.medians.push_back(median_row(arm, "nihss_baseline", [](const auto& r) { return override_number(r, "nihss_baseline"); }));

  std::size_t labeled = 0;
  for (const auto* r : arm) {
    if (!r->mrs_90d) continue;
    ++labeled;
    ++s.mrs_counts[static_cast<std::size_t>(*r->mrs_90d)];
  }
  for (std::size_t k = 0; k < 7; ++k) s.mrs_percent[k] = pct(s.mrs_counts[k], labeled);
  s.mrs_missing_percent = pct(arm.size() - labeled, arm.size());
  return s;
}

}  // namespace

ojson to_json(const DemographicsTable& table) {
  ojson arms = ojson::array();
  for (const auto& a : table.arms) {
    ojson arm;
    arm["arm"] = a.arm;
    arm["n"] = a.n;
    ojson counts = ojson::array();
    for (const auto& c : a.counts) {
      counts.push_back(ojson{{"variable", c.variable},
                             {"count", c.count},
                             {"percent", c.percent},
                             {"missing_percent", c.missing_percent}});
    }
    arm["counts"] = counts;
    ojson medians = ojson::array();
    for (const auto& m : a.medians) {
      auto opt = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
      medians.push_back(ojson{{"variable", m.variable},
                              {"median", opt(m.median)},
                              {"q1", opt(m.q1)},
                              {"q3", opt(m.q3)},
                              {"missing_percent", m.missing_percent}});
    }
    arm["medians"] = medians;
    ojson dist = ojson::array();
    for (std::size_t k = 0; k < 7; ++k) {
      dist.push_back(ojson{{"mrs", k}, {"count", a.mrs_counts[k]}, {"percent", a.mrs_percent[k]}});
    }
    arm["mrs_distribution"] = dist;
    arm["mrs_missing_percent"] = a.mrs_missing_percent;
    arms.push_back(arm);
  }
  return ojson{{"arms", arms}};
}

DemographicsTable summarize_demographics(const Cohort& cohort, const std::optional<SplitAssignment>& split) {
  DemographicsTable table;
  if (!split) {
    std::vector<const PatientRecord*> all;
    for (const auto& r : cohort.records()) all.push_back(&r);
    table.arms.push_back(summarize_arm("all", all));
    return table;
  }
  std::vector<const PatientRecord*> exploration, test;
  for (const auto& r : cohort.records()) {
    if (split->exploration_ids.count(r.id)) exploration.push_back(&r);
    if (split->test_ids.count(r.id)) test.push_back(&r);
  }
  table.arms.push_back(summarize_arm("exploration", exploration));
  table.arms.push_back(summarize_arm("test", test));
  return table;
}

}  // namespace cope::corpus
