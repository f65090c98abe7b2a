#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cope/corpus/patient.hpp"
#include "cope/corpus/split.hpp"

namespace cope::corpus {

/// "n (pct%)" with the share of records where the variable is missing.
struct CountRow {
  std::string variable;
  std::size_t count = 0;
  double percent = 0.0;          // of records with the variable present
  double missing_percent = 0.0;  // of all records in the arm
};

struct MedianRow {
  std::string variable;
  std::optional<double> median;
  std::optional<double> q1;
  std::optional<double> q3;
  double missing_percent = 0.0;
};

struct ArmSummary {
  std::string arm;
  std::size_t n = 0;
  std::vector<CountRow> counts;
  std::vector<MedianRow> medians;
  std::array<std::size_t, 7> mrs_counts{};
  std::array<double, 7> mrs_percent{};
  double mrs_missing_percent = 0.0;
};

struct DemographicsTable {
  std::vector<ArmSummary> arms;
};

ojson to_json(const DemographicsTable& table);

/// One arm ("all") without a split, otherwise "exploration" and "test".
/// Treatment and history flags come from structured_overrides when present;
/// quartiles use the nearest-rank rule.
DemographicsTable summarize_demographics(const Cohort& cohort,
                                         const std::optional<SplitAssignment>& split = std::nullopt);

}  // namespace cope::corpus
