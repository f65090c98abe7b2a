#include "cope/corpus/patient.hpp"

#include <algorithm>

#include "cope/corpus/ingest.hpp"
#include "cope/util/error.hpp"
#include "cope/util/hash.hpp"

namespace cope::corpus {

std::string_view to_string(Sex sex) { return sex == Sex::male ? "male" : "female"; }

std::optional<Sex> parse_sex(std::string_view text) {
  if (text == "male") return Sex::male;
  if (text == "female") return Sex::female;
  return std::nullopt;
}

namespace {

template <typename T>
ojson optional_json(const std::optional<T>& value) {
  return value ? ojson(*value) : ojson(nullptr);
}

}  // namespace

ojson to_json(const PatientRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["note_text"] = r.note_text;
  j["mrs_90d"] = optional_json(r.mrs_90d);
  j["mrs_followup_days"] = optional_json(r.mrs_followup_days);
  j["age_years"] = optional_json(r.age_years);
  j["sex"] = r.sex ? ojson(std::string(to_string(*r.sex))) : ojson(nullptr);
  j["evt"] = optional_json(r.evt);
  j["died_in_hospital"] = optional_json(r.died_in_hospital);
  if (!r.structured_overrides.is_null()) {
    // json keeps keys sorted, which fixes the nested order.
    j["structured_overrides"] = ojson::parse(r.structured_overrides.dump());
  }
  return j;
}

Cohort::Cohort(std::vector<PatientRecord> records, Provenance provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {
  std::vector<std::string> duplicates;
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!index_.emplace(records_[i].id, i).second) duplicates.push_back(records_[i].id);
  }
  if (!duplicates.empty()) {
    std::sort(duplicates.begin(), duplicates.end());
    duplicates.erase(std::unique(duplicates.begin(), duplicates.end()), duplicates.end());
    std::string joined;
    for (const auto& d : duplicates) joined += (joined.empty() ? "" : ", ") + d;
    throw DataError("duplicate patient id: " + joined, duplicates);
  }
  hash_ = sha256_hex(serialize_jsonl(records_));
}

const PatientRecord* Cohort::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

Cohort Cohort::derive(std::vector<PatientRecord> records) const {
  return Cohort(std::move(records), provenance_);
}

}  // namespace cope::corpus
