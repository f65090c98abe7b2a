#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include "cope/corpus/patient.hpp"

namespace cope::corpus {

/// Exact fraction num/den with 0 < num < den.
struct Fraction {
  std::int64_t num = 1;
  std::int64_t den = 5;

  /// Accepts "1/5" or a decimal such as "0.2". Throws ConfigError.
  static Fraction parse(std::string_view text);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
};

/// round_half_even(fraction * n), exact.
std::int64_t stratum_quota(Fraction fraction, std::int64_t n);

struct SplitAssignment {
  std::set<std::string> exploration_ids;
  std::set<std::string> test_ids;
  std::uint64_t seed = 0;
  Fraction fraction;
};

ojson to_json(const SplitAssignment& split);
SplitAssignment split_from_json(const json& j);

/// Per mRS stratum, exploration receives stratum_quota(fraction, n_s) records
/// picked by a seeded shuffle of the stratum's ids in sorted order, so the
/// result does not depend on file order. Throws DataError on unlabeled
/// records, ConfigError on a fraction outside (0, 1).
SplitAssignment stratified_split(const Cohort& cohort, Fraction fraction, std::uint64_t seed);

/// Records of `cohort` whose id is in `ids`, in cohort order.
Cohort subset(const Cohort& cohort, const std::set<std::string>& ids);

}  // namespace cope::corpus
