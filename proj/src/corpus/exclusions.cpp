#include "cope/corpus/exclusions.hpp"

namespace cope::corpus {

ojson to_json(const ExclusionReport& report) {
  ojson j;
  j["input"] = report.input;
  j["missing_label"] = report.missing_label;
  j["in_hospital_death"] = report.in_hospital_death;
  j["retained"] = report.retained;
  return j;
}

std::pair<Cohort, ExclusionReport> apply_exclusions(const Cohort& cohort) {
  ExclusionReport report;
  report.input = cohort.size();
  std::vector<PatientRecord> labeled;
  for (const auto& r : cohort.records()) {
    if (r.mrs_90d) {
      labeled.push_back(r);
    } else {
      ++report.missing_label;
    }
  }
  std::vector<PatientRecord> kept;
  for (auto& r : labeled) {
    if (r.died_in_hospital.value_or(false)) {
      ++report.in_hospital_death;
    } else {
      kept.push_back(std::move(r));
    }
  }
  report.retained = kept.size();
  return {cohort.derive(std::move(kept)), report};
}

}  // namespace cope::corpus
