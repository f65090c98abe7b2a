#pragma once

#include <cstddef>
#include <utility>

#include "cope/corpus/patient.hpp"

namespace cope::corpus {

/// Counts per exclusion reason, in the order the filters run.
struct ExclusionReport {
  std::size_t input = 0;
  std::size_t missing_label = 0;
  std::size_t in_hospital_death = 0;
  std::size_t retained = 0;
};

ojson to_json(const ExclusionReport& report);

/// Drops records without a 90-day mRS, then records that died in hospital.
std::pair<Cohort, ExclusionReport> apply_exclusions(const Cohort& cohort);

}  // namespace cope::corpus
