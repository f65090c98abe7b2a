#include "cope/corpus/split.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <numeric>
#include <vector>

#include "cope/util/error.hpp"
#include "cope/util/rng.hpp"

namespace cope::corpus {

Fraction Fraction::parse(std::string_view text) {
  auto fail = [&]() -> Fraction {
    throw ConfigError("fraction must lie strictly between 0 and 1: \"" + std::string(text) + "\"");
  };
  auto to_int = [](std::string_view s, std::int64_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size() && !s.empty();
  };
  Fraction f;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    if (!to_int(text.substr(0, slash), f.num) || !to_int(text.substr(slash + 1), f.den)) return fail();
  } else {
    auto dot = text.find('.');
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (frac.size() > 12) return fail();
    std::int64_t w = 0, d = 0;
    if (!whole.empty() && !to_int(whole, w)) return fail();
    if (!frac.empty() && !to_int(frac, d)) return fail();
    f.den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) f.den *= 10;
    f.num = w * f.den + d;
  }
  if (f.den <= 0 || f.num <= 0 || f.num >= f.den) return fail();
  const std::int64_t g = std::gcd(f.num, f.den);
  f.num /= g;
  f.den /= g;
  return f;
}

std::string Fraction::str() const { return std::to_string(num) + "/" + std::to_string(den); }

std::int64_t stratum_quota(Fraction fraction, std::int64_t n) {
  const std::int64_t scaled = fraction.num * n;
  std::int64_t q = scaled / fraction.den;
  const std::int64_t twice_rem = 2 * (scaled % fraction.den);
  if (twice_rem > fraction.den || (twice_rem == fraction.den && q % 2 == 1)) ++q;
  return std::clamp<std::int64_t>(q, 0, n);
}

ojson to_json(const SplitAssignment& split) {
  ojson j;
  j["seed"] = split.seed;
  j["fraction"] = split.fraction.str();
  j["exploration_ids"] = split.exploration_ids;
  j["test_ids"] = split.test_ids;
  return j;
}

SplitAssignment split_from_json(const json& j) {
  SplitAssignment s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.fraction = Fraction::parse(j.at("fraction").get<std::string>());
  s.exploration_ids = j.at("exploration_ids").get<std::set<std::string>>();
  s.test_ids = j.at("test_ids").get<std::set<std::string>>();
  return s;
}

SplitAssignment stratified_split(const Cohort& cohort, Fraction fraction, std::uint64_t seed) {
  if (fraction.den <= 0 || fraction.num <= 0 || fraction.num >= fraction.den) {
    throw ConfigError("split fraction must lie in (0, 1), got " + fraction.str());
  }
  std::array<std::vector<std::string>, 7> strata;
  std::vector<std::string> unlabeled;
  for (const auto& r : cohort.records()) {
    if (!r.mrs_90d) {
      unlabeled.push_back(r.id);
      continue;
    }
    strata[static_cast<std::size_t>(*r.mrs_90d)].push_back(r.id);
  }
  if (!unlabeled.empty()) {
    throw DataError(std::to_string(unlabeled.size()) + " record(s) lack mrs_90d; apply exclusions first",
                    unlabeled);
  }
  SplitAssignment out;
  out.seed = seed;
  out.fraction = fraction;
  for (std::size_t mrs = 0; mrs < strata.size(); ++mrs) {
    auto& ids = strata[mrs];
    std::sort(ids.begin(), ids.end());
    SplitMix64 rng(substream_seed(seed, mrs));
    seeded_shuffle(std::span<std::string>(ids), rng);
    const auto quota = static_cast<std::size_t>(stratum_quota(fraction, static_cast<std::int64_t>(ids.size())));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (i < quota ? out.exploration_ids : out.test_ids).insert(ids[i]);
    }
  }
  return out;
}

Cohort subset(const Cohort& cohort, const std::set<std::string>& ids) {
  std::vector<PatientRecord> kept;
  for (const auto& r : cohort.records()) {
    if (ids.count(r.id)) kept.push_back(r);
  }
  return cohort.derive(std::move(kept));
}

}  // namespace cope::corpus
