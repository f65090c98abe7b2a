#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cope/util/json.hpp"

namespace cope::corpus {

enum class Sex { male, female };

std::string_view to_string(Sex sex);
std::optional<Sex> parse_sex(std::string_view text);

struct PatientRecord {
  std::string id;
  std::string note_text;
  std::optional<int> mrs_90d;
  std::optional<int> mrs_followup_days;
  std::optional<int> age_years;
  std::optional<Sex> sex;
  std::optional<bool> evt;
  std::optional<bool> died_in_hospital;
  /// Pre-extracted clinical variables keyed like features::StructuredFeatures.
  /// Null when absent.
  json structured_overrides;

  bool operator==(const PatientRecord&) const = default;
};

ojson to_json(const PatientRecord& record);

struct Provenance {
  std::string source;
  std::string ingested_at;
};

/// Ordered, id-unique collection of patients. Immutable once built.
class Cohort {
 public:
  Cohort() = default;
  /// Throws DataError listing every duplicated id.
  explicit Cohort(std::vector<PatientRecord> records, Provenance provenance = {});

  const std::vector<PatientRecord>& records() const { return records_; }
  const Provenance& provenance() const { return provenance_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const PatientRecord* find(std::string_view id) const;

  /// SHA-256 over the canonical JSONL serialization; independent of source
  /// format and ingestion time.
  const std::string& content_hash() const { return hash_; }

  /// Same provenance, different records (used by filters and subsets).
  Cohort derive(std::vector<PatientRecord> records) const;

 private:
  std::vector<PatientRecord> records_;
  Provenance provenance_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string hash_;
};

}  // namespace cope::corpus
