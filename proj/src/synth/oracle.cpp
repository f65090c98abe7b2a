#include "cope/synth/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace cope::synth {

int oracle_mrs(int nihss_discharge, double age_years) {
  int base = 0;
  if (nihss_discharge <= 0) base = 0;
  else if (nihss_discharge <= 4) base = 1;
  else if (nihss_discharge <= 9) base = 2;
  else if (nihss_discharge <= 14) base = 3;
  else if (nihss_discharge <= 20) base = 4;
  else base = 5;
  if (age_years > 80) ++base;
  return std::clamp(base, 0, 6);
}

int oracle_mrs(const LatentProfile& profile) {
  const auto& f = profile.features;
  if (!f.nihss_discharge || !f.age_years) {
    throw std::invalid_argument("oracle_mrs needs discharge NIHSS and age");
  }
  return oracle_mrs(*f.nihss_discharge, *f.age_years);
}

std::vector<std::string> validate(const LatentProfile& p) {
  std::vector<std::string> problems;
  const auto& f = p.features;
  if (features::populated_count(f) != features::field_names().size()) {
    problems.push_back("profile has unpopulated fields");
    return problems;
  }
  if (*f.age_years < 18 || *f.age_years > 100) problems.push_back("age outside 18-100");
  for (int v : {*f.nihss_baseline, *f.nihss_24h, *f.nihss_discharge}) {
    if (v < 0 || v > 42) problems.push_back("NIHSS outside 0-42");
  }
  if (*f.nihss_discharge > *f.nihss_24h && !*f.procedure_complication) {
    problems.push_back("discharge NIHSS exceeds 24-hour NIHSS without a complication");
  }
  if (*f.hba1c < 4.0 || *f.hba1c > 14.0) problems.push_back("HbA1c outside 4-14%");
  if (*f.ldl < 30 || *f.ldl > 250) problems.push_back("LDL outside 30-250 mg/dL");
  if (!*f.evt && (*f.tici != features::Tici::t0 || *f.procedure_complication)) {
    problems.push_back("reperfusion grade or complication recorded without thrombectomy");
  }
  if (p.noise_level < 0 || p.noise_level > 2) problems.push_back("noise level outside 0-2");
  return problems;
}

ojson to_json(const LatentProfile& p) {
  ojson j;
  j["id"] = p.id;
  j["oracle_mrs"] = oracle_mrs(p);
  j["label_shift"] = p.label_shift;
  j["noise_level"] = p.noise_level;
  j["seed"] = p.seed;
  j["features"] = features::to_json(p.features);
  return j;
}

LatentProfile profile_from_json(const json& j) {
  LatentProfile p;
  p.id = j.at("id").get<std::string>();
  p.label_shift = j.at("label_shift").get<int>();
  p.noise_level = j.at("noise_level").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.features = features::features_from_json(j.at("features"));
  return p;
}

}  // namespace cope::synth
