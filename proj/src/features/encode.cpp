#include "cope/features/encode.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "cope/util/error.hpp"
#include "cope/util/quantile.hpp"

namespace cope::features {

std::string_view to_string(Encoding e) {
  switch (e) {
    case Encoding::standardized: return "standardized";
    case Encoding::binary: return "binary";
    case Encoding::ordinal: return "ordinal";
    case Encoding::one_hot: return "one_hot";
    case Encoding::missing_indicator: return "missing_indicator";
  }
  return "?";
}

namespace {

Encoding parse_encoding(std::string_view s) {
  for (auto e : {Encoding::standardized, Encoding::binary, Encoding::ordinal, Encoding::one_hot,
                 Encoding::missing_indicator}) {
    if (to_string(e) == s) return e;
  }
  throw DataError("unknown column encoding \"" + std::string(s) + "\"");
}

enum class FieldType { numeric, binary, ordinal, categorical };

struct FieldDef {
  const char* name;
  FieldType type;
};

// Column order of the encoded matrix.
constexpr FieldDef kFields[] = {
    {"age_years", FieldType::numeric},
    {"nihss_baseline", FieldType::numeric},
    {"nihss_24h", FieldType::numeric},
    {"nihss_discharge", FieldType::numeric},
    {"hba1c", FieldType::numeric},
    {"ldl", FieldType::numeric},
    {"sex", FieldType::binary},
    {"prior_stroke", FieldType::binary},
    {"hypertension", FieldType::binary},
    {"diabetes", FieldType::binary},
    {"atrial_fibrillation", FieldType::binary},
    {"transfer_status", FieldType::binary},
    {"iv_tpa", FieldType::binary},
    {"evt", FieldType::binary},
    {"procedure_complication", FieldType::binary},
    {"tici", FieldType::ordinal},
    {"discharge_destination", FieldType::categorical},
};

template <typename T>
std::optional<double> num(const std::optional<T>& v) {
  return v ? std::optional<double>(static_cast<double>(*v)) : std::nullopt;
}

std::optional<double> bool_num(const std::optional<bool>& v) {
  return v ? std::optional<double>(*v ? 1.0 : 0.0) : std::nullopt;
}

// Raw numeric view of one field: booleans 0/1, sex male=1, TICI ordinal,
// destination index.
std::optional<double> raw_value(const StructuredFeatures& f, std::string_view field) {
  if (field == "age_years") return f.age_years;
  if (field == "nihss_baseline") return num(f.nihss_baseline);
  if (field == "nihss_24h") return num(f.nihss_24h);
  if (field == "nihss_discharge") return num(f.nihss_discharge);
  if (field == "hba1c") return f.hba1c;
  if (field == "ldl") return f.ldl;
  if (field == "sex") return f.sex ? std::optional<double>(*f.sex == corpus::Sex::male ? 1.0 : 0.0) : std::nullopt;
  if (field == "prior_stroke") return bool_num(f.prior_stroke);
  if (field == "hypertension") return bool_num(f.hypertension);
  if (field == "diabetes") return bool_num(f.diabetes);
  if (field == "atrial_fibrillation") return bool_num(f.atrial_fibrillation);
  if (field == "transfer_status") return bool_num(f.transfer_status);
  if (field == "iv_tpa") return bool_num(f.iv_tpa);
  if (field == "evt") return bool_num(f.evt);
  if (field == "procedure_complication") return bool_num(f.procedure_complication);
  if (field == "tici") return f.tici ? std::optional<double>(tici_ordinal(*f.tici)) : std::nullopt;
  if (field == "discharge_destination")
    return f.discharge_destination ? std::optional<double>(static_cast<int>(*f.discharge_destination)) : std::nullopt;
  return std::nullopt;
}

void set_raw(StructuredFeatures& f, std::string_view field, double v) {
  const auto b = v > 0.5;
  const auto i = static_cast<int>(std::lround(v));
  if (field == "age_years") f.age_years = v;
  else if (field == "nihss_baseline") f.nihss_baseline = i;
  else if (field == "nihss_24h") f.nihss_24h = i;
  else if (field == "nihss_discharge") f.nihss_discharge = i;
  else if (field == "hba1c") f.hba1c = v;
  else if (field == "ldl") f.ldl = v;
  else if (field == "sex") f.sex = b ? corpus::Sex::male : corpus::Sex::female;
  else if (field == "prior_stroke") f.prior_stroke = b;
  else if (field == "hypertension") f.hypertension = b;
  else if (field == "diabetes") f.diabetes = b;
  else if (field == "atrial_fibrillation") f.atrial_fibrillation = b;
  else if (field == "transfer_status") f.transfer_status = b;
  else if (field == "iv_tpa") f.iv_tpa = b;
  else if (field == "evt") f.evt = b;
  else if (field == "procedure_complication") f.procedure_complication = b;
  else if (field == "tici") f.tici = static_cast<Tici>(std::clamp(i, 0, 5));
  else if (field == "discharge_destination") f.discharge_destination = static_cast<Destination>(std::clamp(i, 0, 5));
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return nearest_rank(std::span<const double>(values), 1, 2);
}

// Most frequent value; ties go to the smallest.
double mode_of(const std::vector<double>& values) {
  std::map<double, std::size_t> counts;
  for (double v : values) ++counts[v];
  double best = counts.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [v, c] : counts) {
    if (c > best_count) {
      best = v;
      best_count = c;
    }
  }
  return best;
}

}  // namespace

FeatureEncoder FeatureEncoder::fit(const std::vector<StructuredFeatures>& train) {
  if (train.empty()) throw std::invalid_argument("cannot fit a feature encoder on zero rows");
  FeatureEncoder enc;
  for (const auto& def : kFields) {
    std::vector<double> observed;
    for (const auto& row : train) {
      if (auto v = raw_value(row, def.name)) observed.push_back(*v);
    }
    const bool any_missing = observed.size() < train.size();
    const bool all_missing = observed.empty();
    if (all_missing) {
      spdlog::warn("feature {} is missing in every training row; keeping a constant column and its indicator",
                   def.name);
      enc.all_missing_.emplace_back(def.name);
    }
    double impute = 0.0;
    if (!all_missing) impute = def.type == FieldType::numeric ? median_of(observed) : mode_of(observed);

    if (def.type == FieldType::categorical) {
      for (int k = 0; k < kDestinationCount; ++k) {
        ColumnSpec c;
        c.name = std::string(def.name) + "=" + std::string(to_string(static_cast<Destination>(k)));
        c.field = def.name;
        c.encoding = Encoding::one_hot;
        c.category = k;
        c.impute = impute;
        enc.columns_.push_back(std::move(c));
      }
    } else {
      ColumnSpec c;
      c.name = def.name;
      c.field = def.name;
      c.impute = impute;
      switch (def.type) {
        case FieldType::numeric: {
          c.encoding = Encoding::standardized;
          if (!all_missing) {
            double mean = 0.0;
            for (double v : observed) mean += v;
            mean /= static_cast<double>(observed.size());
            double var = 0.0;
            for (double v : observed) var += (v - mean) * (v - mean);
            var /= static_cast<double>(observed.size());
            c.mean = mean;
            c.scale = var > 0.0 ? std::sqrt(var) : 1.0;
          }
          break;
        }
        case FieldType::binary: c.encoding = Encoding::binary; break;
        default: c.encoding = Encoding::ordinal; break;
      }
      enc.columns_.push_back(std::move(c));
    }
    if (any_missing) {
      ColumnSpec ind;
      ind.name = std::string(def.name) + "_missing";
      ind.field = def.name;
      ind.encoding = Encoding::missing_indicator;
      enc.columns_.push_back(std::move(ind));
    }
  }
  return enc;
}

std::vector<double> FeatureEncoder::transform_row(const StructuredFeatures& row) const {
  std::vector<double> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) {
    const std::optional<double> raw = raw_value(row, c.field);
    const double v = raw.value_or(c.impute);
    switch (c.encoding) {
      case Encoding::standardized: out.push_back((v - c.mean) / c.scale); break;
      case Encoding::binary:
      case Encoding::ordinal: out.push_back(v); break;
      case Encoding::one_hot: out.push_back(std::lround(v) == c.category ? 1.0 : 0.0); break;
      case Encoding::missing_indicator: out.push_back(raw ? 0.0 : 1.0); break;
    }
  }
  return out;
}

FeatureMatrix FeatureEncoder::transform(const std::vector<StructuredFeatures>& rows) const {
  FeatureMatrix m;
  m.column_spec = columns_;
  for (const auto& row : rows) {
    m.rows.push_back(transform_row(row));
    std::vector<bool> mask;
    mask.reserve(columns_.size());
    for (const auto& c : columns_) {
      mask.push_back(c.encoding != Encoding::missing_indicator && !raw_value(row, c.field).has_value());
    }
    m.missing_mask.push_back(std::move(mask));
  }
  return m;
}

StructuredFeatures FeatureEncoder::decode_row(const std::vector<double>& row) const {
  if (row.size() != columns_.size()) throw std::invalid_argument("decode_row: width mismatch");
  std::map<std::string, bool> missing;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].encoding == Encoding::missing_indicator && row[i] > 0.5) missing[columns_[i].field] = true;
  }
  StructuredFeatures f;
  std::map<std::string, std::pair<int, double>> best_category;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& c = columns_[i];
    if (missing.count(c.field)) continue;
    switch (c.encoding) {
      case Encoding::standardized: set_raw(f, c.field, row[i] * c.scale + c.mean); break;
      case Encoding::binary:
      case Encoding::ordinal: set_raw(f, c.field, row[i]); break;
      case Encoding::one_hot: {
        auto [it, inserted] = best_category.emplace(c.field, std::make_pair(c.category, row[i]));
        if (!inserted && row[i] > it->second.second) it->second = {c.category, row[i]};
        break;
      }
      case Encoding::missing_indicator: break;
    }
  }
  for (const auto& [field, cat] : best_category) set_raw(f, field, cat.first);
  return f;
}

ojson FeatureEncoder::to_json() const {
  ojson cols = ojson::array();
  for (const auto& c : columns_) {
    cols.push_back(ojson{{"name", c.name},
                         {"field", c.field},
                         {"encoding", to_string(c.encoding)},
                         {"category", c.category},
                         {"impute", c.impute},
                         {"mean", c.mean},
                         {"scale", c.scale}});
  }
  return ojson{{"column_spec", cols}, {"all_missing_fields", all_missing_}};
}

FeatureEncoder FeatureEncoder::from_json(const json& j) {
  FeatureEncoder enc;
  for (const auto& c : j.at("column_spec")) {
    ColumnSpec spec;
    spec.name = c.at("name").get<std::string>();
    spec.field = c.at("field").get<std::string>();
    spec.encoding = parse_encoding(c.at("encoding").get<std::string>());
    spec.category = c.at("category").get<int>();
    spec.impute = c.at("impute").get<double>();
    spec.mean = c.at("mean").get<double>();
    spec.scale = c.at("scale").get<double>();
    enc.columns_.push_back(std::move(spec));
  }
  enc.all_missing_ = j.value("all_missing_fields", std::vector<std::string>{});
  return enc;
}

FeatureMatrix encode_features(const std::vector<StructuredFeatures>& features) {
  return FeatureEncoder::fit(features).transform(features);
}

}  // namespace cope::features
