#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cope/features/structured.hpp"
#include "cope/util/json.hpp"

namespace cope::features {

enum class Encoding { standardized, binary, ordinal, one_hot, missing_indicator };

std::string_view to_string(Encoding encoding);

struct ColumnSpec {
  std::string name;
  std::string field;
  Encoding encoding = Encoding::standardized;
  int category = -1;       // one_hot: Destination index
  double impute = 0.0;     // raw-scale value used for missing cells
  double mean = 0.0;       // standardized only
  double scale = 1.0;      // standardized only
};

struct FeatureMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<ColumnSpec> column_spec;
  /// Per cell: true where the value was imputed. Indicator columns are never
  /// marked.
  std::vector<std::vector<bool>> missing_mask;

  std::size_t width() const { return column_spec.size(); }
};

/// Column layout, imputation values and scaling fitted on training rows and
/// then applied unchanged to any rows.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  /// Throws std::invalid_argument on an empty training set.
  static FeatureEncoder fit(const std::vector<StructuredFeatures>& train);

  FeatureMatrix transform(const std::vector<StructuredFeatures>& rows) const;
  std::vector<double> transform_row(const StructuredFeatures& row) const;
  /// Inverse of transform_row for fields that were present.
  StructuredFeatures decode_row(const std::vector<double>& row) const;

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  /// Fields that were missing in every training row.
  const std::vector<std::string>& all_missing_fields() const { return all_missing_; }

  ojson to_json() const;
  static FeatureEncoder from_json(const json& j);

 private:
  std::vector<ColumnSpec> columns_;
  std::vector<std::string> all_missing_;
};

/// Fits on `features` and encodes them.
FeatureMatrix encode_features(const std::vector<StructuredFeatures>& features);

}  // namespace cope::features
