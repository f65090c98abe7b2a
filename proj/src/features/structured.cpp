#include "cope/features/structured.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

#include "cope/util/error.hpp"

namespace cope::features {

namespace {
constexpr std::string_view kTiciNames[] = {"0", "1", "2a", "2b", "2c", "3"};
constexpr std::string_view kDestinationNames[] = {"home", "acute_rehab", "snf", "ltac", "hospice", "other"};

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_int_in(std::string_view s, int lo, int hi) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < lo || v > hi) return std::nullopt;
  return v;
}

std::optional<bool> parse_flag(std::string_view s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  return std::nullopt;
}

template <typename T>
bool assign(std::optional<T>& slot, std::optional<T> value) {
  if (!value) return false;
  slot = value;
  return true;
}
}  // namespace

std::string_view to_string(Tici tici) { return kTiciNames[static_cast<int>(tici)]; }
std::string_view to_string(Destination d) { return kDestinationNames[static_cast<int>(d)]; }

std::optional<Tici> parse_tici(std::string_view text) {
  for (int i = 0; i < 6; ++i) {
    if (text == kTiciNames[i]) return static_cast<Tici>(i);
  }
  return std::nullopt;
}

std::optional<Destination> parse_destination(std::string_view text) {
  for (int i = 0; i < kDestinationCount; ++i) {
    if (text == kDestinationNames[i]) return static_cast<Destination>(i);
  }
  return std::nullopt;
}

int tici_ordinal(Tici tici) { return static_cast<int>(tici); }

const std::vector<std::string>& field_names() {
  static const std::vector<std::string> kNames = {
      "age_years",      "sex",        "prior_stroke", "hypertension",    "diabetes",
      "atrial_fibrillation", "transfer_status", "nihss_baseline", "nihss_24h", "nihss_discharge",
      "hba1c",          "ldl",        "iv_tpa",       "evt",             "tici",
      "procedure_complication", "discharge_destination"};
  return kNames;
}

bool set_field(StructuredFeatures& f, std::string_view field, std::string_view value) {
  if (field == "age_years") {
    auto v = parse_number(value);
    if (!v || *v < 0 || *v > 150) return false;
    f.age_years = v;
    return true;
  }
  if (field == "sex") return assign(f.sex, corpus::parse_sex(value));
  if (field == "prior_stroke") return assign(f.prior_stroke, parse_flag(value));
  if (field == "hypertension") return assign(f.hypertension, parse_flag(value));
  if (field == "diabetes") return assign(f.diabetes, parse_flag(value));
  if (field == "atrial_fibrillation") return assign(f.atrial_fibrillation, parse_flag(value));
  if (field == "transfer_status") return assign(f.transfer_status, parse_flag(value));
  if (field == "nihss_baseline") return assign(f.nihss_baseline, parse_int_in(value, 0, 42));
  if (field == "nihss_24h") return assign(f.nihss_24h, parse_int_in(value, 0, 42));
  if (field == "nihss_discharge") return assign(f.nihss_discharge, parse_int_in(value, 0, 42));
  if (field == "hba1c") {
    auto v = parse_number(value);
    if (!v || *v <= 0 || *v > 30) return false;
    f.hba1c = v;
    return true;
  }
  if (field == "ldl") {
    auto v = parse_number(value);
    if (!v || *v <= 0 || *v > 1000) return false;
    f.ldl = v;
    return true;
  }
  if (field == "iv_tpa") return assign(f.iv_tpa, parse_flag(value));
  if (field == "evt") return assign(f.evt, parse_flag(value));
  if (field == "tici") return assign(f.tici, parse_tici(value));
  if (field == "procedure_complication") return assign(f.procedure_complication, parse_flag(value));
  if (field == "discharge_destination") return assign(f.discharge_destination, parse_destination(value));
  return false;
}

bool has_field(const StructuredFeatures& f, std::string_view field) {
  if (field == "age_years") return f.age_years.has_value();
  if (field == "sex") return f.sex.has_value();
  if (field == "prior_stroke") return f.prior_stroke.has_value();
  if (field == "hypertension") return f.hypertension.has_value();
  if (field == "diabetes") return f.diabetes.has_value();
  if (field == "atrial_fibrillation") return f.atrial_fibrillation.has_value();
  if (field == "transfer_status") return f.transfer_status.has_value();
  if (field == "nihss_baseline") return f.nihss_baseline.has_value();
  if (field == "nihss_24h") return f.nihss_24h.has_value();
  if (field == "nihss_discharge") return f.nihss_discharge.has_value();
  if (field == "hba1c") return f.hba1c.has_value();
  if (field == "ldl") return f.ldl.has_value();
  if (field == "iv_tpa") return f.iv_tpa.has_value();
  if (field == "evt") return f.evt.has_value();
  if (field == "tici") return f.tici.has_value();
  if (field == "procedure_complication") return f.procedure_complication.has_value();
  if (field == "discharge_destination") return f.discharge_destination.has_value();
  return false;
}

std::size_t populated_count(const StructuredFeatures& f) {
  std::size_t n = 0;
  for (const auto& name : field_names()) n += has_field(f, name) ? 1 : 0;
  return n;
}

ojson to_json(const StructuredFeatures& f) {
  ojson j = ojson::object();
  if (f.age_years) j["age_years"] = *f.age_years;
  if (f.sex) j["sex"] = corpus::to_string(*f.sex);
  if (f.prior_stroke) j["prior_stroke"] = *f.prior_stroke;
  if (f.hypertension) j["hypertension"] = *f.hypertension;
  if (f.diabetes) j["diabetes"] = *f.diabetes;
  if (f.atrial_fibrillation) j["atrial_fibrillation"] = *f.atrial_fibrillation;
  if (f.transfer_status) j["transfer_status"] = *f.transfer_status;
  if (f.nihss_baseline) j["nihss_baseline"] = *f.nihss_baseline;
  if (f.nihss_24h) j["nihss_24h"] = *f.nihss_24h;
  if (f.nihss_discharge) j["nihss_discharge"] = *f.nihss_discharge;
  if (f.hba1c) j["hba1c"] = *f.hba1c;
  if (f.ldl) j["ldl"] = *f.ldl;
  if (f.iv_tpa) j["iv_tpa"] = *f.iv_tpa;
  if (f.evt) j["evt"] = *f.evt;
  if (f.tici) j["tici"] = to_string(*f.tici);
  if (f.procedure_complication) j["procedure_complication"] = *f.procedure_complication;
  if (f.discharge_destination) j["discharge_destination"] = to_string(*f.discharge_destination);
  return j;
}

namespace {
std::string scalar_text(const json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    std::string s = v.dump();
    return s;
  }
  if (v.is_string()) return v.get<std::string>();
  return {};
}
}  // namespace

void apply_overrides(StructuredFeatures& base, const json& overrides) {
  if (overrides.is_null()) return;
  if (!overrides.is_object()) throw DataError("structured overrides must be a JSON object");
  std::vector<std::string> bad;
  for (const auto& [key, value] : overrides.items()) {
    if (value.is_null()) continue;
    if (!set_field(base, key, scalar_text(value))) bad.push_back(key + "=" + value.dump());
  }
  if (!bad.empty()) throw DataError("invalid structured override(s)", bad);
}

StructuredFeatures features_from_json(const json& j) {
  StructuredFeatures f;
  apply_overrides(f, j);
  return f;
}

}  // namespace cope::features
