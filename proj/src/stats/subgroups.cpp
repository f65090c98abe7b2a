#include "cope/stats/subgroups.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cope/corpus/text.hpp"
#include "cope/util/quantile.hpp"

namespace cope::stats {

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::sex: return "sex";
    case Axis::evt: return "evt";
    case Axis::note_length_quartile: return "note_length_quartile";
    case Axis::age_band: return "age_band";
  }
  return "?";
}

Axis parse_axis(std::string_view name) {
  if (name == "sex") return Axis::sex;
  if (name == "evt") return Axis::evt;
  if (name == "note_length_quartile" || name == "length") return Axis::note_length_quartile;
  if (name == "age_band" || name == "age") return Axis::age_band;
  throw std::invalid_argument("unknown subgroup axis \"" + std::string(name) + "\"");
}

std::string age_band(int age) {
  if (age < 0) throw std::invalid_argument("negative age");
  if (age < 46) return kAgeBands[0];
  if (age <= 64) return kAgeBands[1];
  if (age <= 80) return kAgeBands[2];
  return kAgeBands[3];
}

int QuartileBins::band_of(double value) const {
  if (degenerate) return 3;
  if (value < cutoffs[0]) return 0;
  if (value < cutoffs[1]) return 1;
  if (value < cutoffs[2]) return 2;
  return 3;
}

namespace {
std::string num(double v) {
  std::ostringstream os;
  if (std::floor(v) == v && std::fabs(v) < 1e15) {
    os << static_cast<long long>(v);
  } else {
    os << v;
  }
  return os.str();
}

// Upper edge shown for a half-open band: c - 1 for integral cutoffs.
std::string below(double cutoff) {
  return std::floor(cutoff) == cutoff ? num(cutoff - 1) : "<" + num(cutoff);
}
}  // namespace

std::array<std::string, 4> QuartileBins::labels() const {
  return {"Q1 <" + num(cutoffs[0]), "Q2 " + num(cutoffs[0]) + "-" + below(cutoffs[1]),
          "Q3 " + num(cutoffs[1]) + "-" + below(cutoffs[2]), "Q4 >=" + num(cutoffs[2])};
}

QuartileBins quartile_bins(std::span<const double> values) {
  if (values.size() < 4) throw std::invalid_argument("quartile bins need at least four values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::span<const double> s(sorted);
  QuartileBins bins;
  bins.cutoffs = {nearest_rank(s, 1, 4), nearest_rank(s, 1, 2), nearest_rank(s, 3, 4)};
  bins.min = sorted.front();
  bins.max = sorted.back();
  bins.degenerate = bins.min == bins.max;
  return bins;
}

SubgroupReport subgroup_report(const PairedOutcomes& outcomes, const corpus::Cohort& cohort,
                               const std::vector<Axis>& axes, const BootstrapConfig& config) {
  SubgroupReport report;
  report.bootstrap = config;
  const MetricFn fn = metric_fn(Metric::mae);

  std::vector<const corpus::PatientRecord*> recs;
  recs.reserve(outcomes.size());
  for (const auto& id : outcomes.ids()) recs.push_back(cohort.find(id));

  for (Axis axis : axes) {
    const std::string axis_name(to_string(axis));
    std::vector<std::string> bands;
    std::vector<int> band_of(outcomes.size(), -1);

    switch (axis) {
      case Axis::sex:
        bands = {"male", "female"};
        for (std::size_t i = 0; i < recs.size(); ++i) {
          if (recs[i] && recs[i]->sex) band_of[i] = *recs[i]->sex == corpus::Sex::male ? 0 : 1;
        }
        break;
      case Axis::evt:
        bands = {"non-EVT", "EVT"};
        for (std::size_t i = 0; i < recs.size(); ++i) {
          if (recs[i] && recs[i]->evt) band_of[i] = *recs[i]->evt ? 1 : 0;
        }
        break;
      case Axis::age_band:
        bands.assign(kAgeBands.begin(), kAgeBands.end());
        for (std::size_t i = 0; i < recs.size(); ++i) {
          if (!recs[i] || !recs[i]->age_years || *recs[i]->age_years < 0) continue;
          const std::string b = age_band(*recs[i]->age_years);
          band_of[i] = static_cast<int>(std::find(bands.begin(), bands.end(), b) - bands.begin());
        }
        break;
      case Axis::note_length_quartile: {
        std::vector<double> lengths;
        for (const auto* r : recs) {
          if (r) lengths.push_back(static_cast<double>(corpus::word_count(r->note_text)));
        }
        if (lengths.size() < 4) {
          bands = {"Q1", "Q2", "Q3", "Q4"};
          break;
        }
        const QuartileBins bins = quartile_bins(lengths);
        const auto labels = bins.labels();
        bands.assign(labels.begin(), labels.end());
        for (std::size_t i = 0; i < recs.size(); ++i) {
          if (recs[i]) band_of[i] = bins.band_of(static_cast<double>(corpus::word_count(recs[i]->note_text)));
        }
        report.length_bins = bins;
        break;
      }
    }

    std::size_t unknown = 0;
    std::vector<std::vector<std::size_t>> members(bands.size());
    for (std::size_t i = 0; i < band_of.size(); ++i) {
      if (band_of[i] < 0) {
        ++unknown;
      } else {
        members[static_cast<std::size_t>(band_of[i])].push_back(i);
      }
    }
    report.unknown[axis_name] = unknown;

    for (std::size_t b = 0; b < bands.size(); ++b) {
      ForestRow row;
      row.axis = axis_name;
      row.band = bands[b];
      row.n = members[b].size();
      if (row.n > 0) {
        const PairedOutcomes sub = outcomes.select(members[b]);
        row.mae = mae(sub);
        if (row.n >= 2 && config.resamples >= 100) row.ci = bootstrap_ci(sub, fn, config);
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

ojson to_json(const SubgroupReport& r) {
  ojson rows = ojson::array();
  for (const auto& row : r.rows) {
    rows.push_back(ojson{{"axis", row.axis},
                         {"band", row.band},
                         {"n", row.n},
                         {"mae", row.mae ? ojson(*row.mae) : ojson(nullptr)},
                         {"ci_lo", row.ci ? ojson(row.ci->lo) : ojson(nullptr)},
                         {"ci_hi", row.ci ? ojson(row.ci->hi) : ojson(nullptr)}});
  }
  ojson j;
  j["excluded"] = r.excluded;
  j["bootstrap"] = ojson{{"resamples", r.bootstrap.resamples}, {"seed", r.bootstrap.seed}};
  ojson unknown = ojson::object();
  for (const auto& [axis, n] : r.unknown) unknown[axis] = n;
  j["unknown"] = unknown;
  if (r.length_bins) {
    const auto& b = *r.length_bins;
    j["length_bins"] = ojson{{"cutoffs", b.cutoffs}, {"min", b.min}, {"max", b.max}, {"degenerate", b.degenerate}};
  }
  j["rows"] = rows;
  return j;
}

SubgroupReport subgroup_report_from_json(const json& j) {
  SubgroupReport r;
  r.excluded = j.at("excluded").get<std::size_t>();
  r.bootstrap.resamples = j.at("bootstrap").at("resamples").get<int>();
  r.bootstrap.seed = j.at("bootstrap").at("seed").get<std::uint64_t>();
  for (const auto& [axis, n] : j.at("unknown").items()) r.unknown[axis] = n.get<std::size_t>();
  if (j.contains("length_bins")) {
    const auto& b = j["length_bins"];
    QuartileBins bins;
    bins.cutoffs = b.at("cutoffs").get<std::array<double, 3>>();
    bins.min = b.at("min").get<double>();
    bins.max = b.at("max").get<double>();
    bins.degenerate = b.at("degenerate").get<bool>();
    r.length_bins = bins;
  }
  for (const auto& row : j.at("rows")) {
    ForestRow f;
    f.axis = row.at("axis").get<std::string>();
    f.band = row.at("band").get<std::string>();
    f.n = row.at("n").get<std::size_t>();
    if (!row.at("mae").is_null()) f.mae = row["mae"].get<double>();
    if (!row.at("ci_lo").is_null()) f.ci = Interval{row["ci_lo"].get<double>(), row.at("ci_hi").get<double>()};
    r.rows.push_back(std::move(f));
  }
  return r;
}

std::string forest_csv(const SubgroupReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "axis,band,n,mae,ci_lo,ci_hi\n";
  for (const auto& row : r.rows) {
    os << row.axis << ',' << row.band << ',' << row.n << ',';
    if (row.mae) os << *row.mae;
    os << ',';
    if (row.ci) os << row.ci->lo;
    os << ',';
    if (row.ci) os << row.ci->hi;
    os << '\n';
  }
  return os.str();
}

}  // namespace cope::stats
