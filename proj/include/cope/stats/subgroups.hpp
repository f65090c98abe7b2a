#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cope/corpus/patient.hpp"
#include "cope/stats/bootstrap.hpp"

namespace cope::stats {

enum class Axis { sex, evt, note_length_quartile, age_band };

std::string_view to_string(Axis axis);
/// Accepts the enum names plus the short forms "length" and "age".
Axis parse_axis(std::string_view name);

/// "<46", "46-64", "65-80" or ">80". Throws std::invalid_argument for age < 0.
std::string age_band(int age_years);
inline const std::array<std::string, 4> kAgeBands = {"<46", "46-64", "65-80", ">80"};

/// Nearest-rank quartile cutoffs. Bands: [min, Q1), [Q1, Q2), [Q2, Q3),
/// [Q3, max]; a value equal to a cutoff joins the upper band.
struct QuartileBins {
  std::array<double, 3> cutoffs{};
  double min = 0.0;
  double max = 0.0;
  bool degenerate = false;  // all values equal: everything lands in the last band

  int band_of(double value) const;
  std::array<std::string, 4> labels() const;
};

/// Throws std::invalid_argument for fewer than four values.
QuartileBins quartile_bins(std::span<const double> values);

struct ForestRow {
  std::string axis;
  std::string band;
  std::size_t n = 0;
  std::optional<double> mae;
  std::optional<Interval> ci;
};

struct SubgroupReport {
  std::vector<ForestRow> rows;
  std::map<std::string, std::size_t> unknown;  // per axis: records lacking the covariate
  std::optional<QuartileBins> length_bins;
  std::size_t excluded = 0;
  BootstrapConfig bootstrap;
};

/// MAE with bootstrap CI per band, ordered by axis (as given) then band.
/// Covariates come from `cohort`; a patient missing from the cohort counts as
/// unknown on every axis. Empty bands are emitted with n = 0 and no estimate.
SubgroupReport subgroup_report(const PairedOutcomes& outcomes, const corpus::Cohort& cohort,
                               const std::vector<Axis>& axes, const BootstrapConfig& config);

ojson to_json(const SubgroupReport& report);
SubgroupReport subgroup_report_from_json(const json& j);
/// Columns: axis,band,n,mae,ci_lo,ci_hi
std::string forest_csv(const SubgroupReport& report);

}  // namespace cope::stats
