#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cope/corpus/patient.hpp"
#include "cope/util/json.hpp"

namespace cope::features {

enum class Tici { t0, t1, t2a, t2b, t2c, t3 };
enum class Destination { home, acute_rehab, snf, ltac, hospice, other };

inline constexpr int kDestinationCount = 6;

std::string_view to_string(Tici tici);
std::string_view to_string(Destination destination);
std::optional<Tici> parse_tici(std::string_view text);
std::optional<Destination> parse_destination(std::string_view text);
/// 0:0, 1:1, 2a:2, 2b:3, 2c:4, 3:5
int tici_ordinal(Tici tici);

/// Clinical variables used by the structured-feature baseline. Every field is
/// optional: absent evidence stays absent.
struct StructuredFeatures {
  std::optional<double> age_years;
  std::optional<corpus::Sex> sex;
  std::optional<bool> prior_stroke;
  std::optional<bool> hypertension;
  std::optional<bool> diabetes;
  std::optional<bool> atrial_fibrillation;
  std::optional<bool> transfer_status;
  std::optional<int> nihss_baseline;
  std::optional<int> nihss_24h;
  std::optional<int> nihss_discharge;
  std::optional<double> hba1c;
  std::optional<double> ldl;
  std::optional<bool> iv_tpa;
  std::optional<bool> evt;
  std::optional<Tici> tici;
  std::optional<bool> procedure_complication;
  std::optional<Destination> discharge_destination;

  bool operator==(const StructuredFeatures&) const = default;
};

/// Field names in canonical order.
const std::vector<std::string>& field_names();

/// Sets `field` from its textual form ("15", "true", "2b", "snf", ...).
/// Returns false when the name is unknown or the value invalid for the field
/// (e.g. an NIHSS outside [0, 42]).
bool set_field(StructuredFeatures& features, std::string_view field, std::string_view value);

bool has_field(const StructuredFeatures& features, std::string_view field);
std::size_t populated_count(const StructuredFeatures& features);

/// Keys absent from the object are omitted; JSON null never appears.
ojson to_json(const StructuredFeatures& features);
/// Accepts numbers, booleans and strings; throws DataError on invalid values.
StructuredFeatures features_from_json(const json& j);
/// Fields present in `overrides` replace those in `base`.
void apply_overrides(StructuredFeatures& base, const json& overrides);

}  // namespace cope::features
