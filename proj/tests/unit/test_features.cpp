#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cope/features/encode.hpp"
#include "cope/features/extract.hpp"
#include "cope/features/grammar.hpp"
#include "cope/features/svr.hpp"
#include "cope/util/error.hpp"
#include "cope/util/rng.hpp"
#include "oracles.hpp"

using namespace cope;
using namespace cope::features;

namespace {

StructuredFeatures full_features(double age, int nihss) {
  StructuredFeatures f;
  f.age_years = age;
  f.sex = corpus::Sex::female;
  f.prior_stroke = false;
  f.hypertension = true;
  f.diabetes = false;
  f.atrial_fibrillation = true;
  f.transfer_status = false;
  f.nihss_baseline = nihss + 4;
  f.nihss_24h = nihss + 2;
  f.nihss_discharge = nihss;
  f.hba1c = 6.1;
  f.ldl = 104;
  f.iv_tpa = true;
  f.evt = true;
  f.tici = Tici::t2b;
  f.procedure_complication = false;
  f.discharge_destination = Destination::snf;
  return f;
}

std::size_t column(const FeatureMatrix& m, const std::string& name) {
  for (std::size_t i = 0; i < m.column_spec.size(); ++i) {
    if (m.column_spec[i].name == name) return i;
  }
  FAIL("no column " << name);
  return 0;
}

}  // namespace

TEST_CASE("extract: labeled numerics") {
  const auto f = extract_features("Baseline NIHSS: 15. HbA1c was 7.2%. LDL cholesterol of 131 mg/dL.");
  CHECK(f.nihss_baseline == 15);
  CHECK(f.hba1c == doctest::Approx(7.2));
  CHECK(f.ldl == doctest::Approx(131));
}

TEST_CASE("extract: absent evidence stays missing") {
  const auto f = extract_features("The patient is a 64-year-old man. Baseline NIHSS was 7.");
  CHECK_FALSE(f.ldl.has_value());
  CHECK_FALSE(f.hba1c.has_value());
  CHECK_FALSE(f.diabetes.has_value());
  CHECK(f.age_years == doctest::Approx(64));
  CHECK(f.sex == corpus::Sex::male);
}

TEST_CASE("extract: negation beats the bare keyword") {
  const auto f = extract_features("No history of diabetes. No known hypertension. History of atrial fibrillation.");
  CHECK(f.diabetes == false);
  CHECK(f.hypertension == false);
  CHECK(f.atrial_fibrillation == true);
}

TEST_CASE("extract: last mention wins and the conflict is recorded") {
  const auto e = extract_features_audited("Discharge NIHSS was 9. Later note: NIHSS at discharge: 6.");
  CHECK(e.features.nihss_discharge == 6);
  REQUIRE(e.conflicts.size() == 1);
  CHECK(e.conflicts[0].field == "nihss_discharge");
  CHECK(e.conflicts[0].values == std::vector<std::string>{"9", "6"});
}

TEST_CASE("extract: TICI and destination choices") {
  const auto f = extract_features("Patient underwent mechanical thrombectomy. Final reperfusion was TICI 2b. "
                                  "She was discharged to acute inpatient rehabilitation.");
  CHECK(f.evt == true);
  CHECK(f.tici == Tici::t2b);
  CHECK(f.discharge_destination == Destination::acute_rehab);
}

TEST_CASE("extract: overrides take precedence") {
  const auto f = extract_features("Baseline NIHSS was 4.", json{{"nihss_baseline", 20}, {"evt", true}});
  CHECK(f.nihss_baseline == 20);
  CHECK(f.evt == true);
  CHECK_THROWS_AS(extract_features("x", json{{"nihss_baseline", 50}}), DataError);
}

TEST_CASE("grammar: syntax errors name the line") {
  try {
    Grammar::parse("version 1\nnumeric nihss_baseline (\\d+\nbogus line\n");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.details().size() >= 2);
    CHECK(e.details()[0].find("line 2") != std::string::npos);
  }
  CHECK(default_grammar().version() == 1);
}

TEST_CASE("encode: TICI ordinal map") {
  CHECK(tici_ordinal(Tici::t0) == 0);
  CHECK(tici_ordinal(Tici::t2a) == 2);
  CHECK(tici_ordinal(Tici::t2b) == 3);
  CHECK(tici_ordinal(Tici::t3) == 5);
  StructuredFeatures f;
  f.tici = Tici::t2b;
  const auto m = encode_features({f});
  CHECK(m.rows[0][column(m, "tici")] == 3.0);
}

TEST_CASE("encode: median imputation with indicator") {
  std::vector<StructuredFeatures> rows(4);
  rows[0].age_years = 60;
  rows[1].age_years = 80;
  rows[2].age_years = 70;
  const auto m = encode_features(rows);
  const auto age = column(m, "age_years");
  const auto indicator = column(m, "age_years_missing");
  CHECK(m.column_spec[age].impute == oracle::nearest_rank({60, 70, 80}, 1, 2));
  CHECK(m.rows[3][indicator] == 1.0);
  CHECK(m.rows[0][indicator] == 0.0);
  CHECK(m.missing_mask[3][age]);
  const auto& spec = m.column_spec[age];
  CHECK(m.rows[3][age] * spec.scale + spec.mean == doctest::Approx(70));
}

TEST_CASE("encode: identical rows encode identically; decode inverts") {
  const auto f = full_features(71, 5);
  const auto m = encode_features({f, f, full_features(50, 12)});
  CHECK(m.rows[0] == m.rows[1]);
  const auto encoder = FeatureEncoder::fit({f, full_features(50, 12)});
  const auto decoded = encoder.decode_row(encoder.transform_row(f));
  CHECK(decoded.age_years == doctest::Approx(71));
  CHECK(decoded.nihss_discharge == 5);
  CHECK(decoded.tici == Tici::t2b);
  CHECK(decoded.discharge_destination == Destination::snf);
  CHECK(decoded.sex == corpus::Sex::female);
  CHECK(FeatureEncoder::from_json(json::parse(encoder.to_json().dump())).transform_row(f) == encoder.transform_row(f));
}

TEST_CASE("encode: all-missing field is kept and reported") {
  std::vector<StructuredFeatures> rows(3);
  rows[0].nihss_baseline = 3;
  rows[1].nihss_baseline = 5;
  const auto encoder = FeatureEncoder::fit(rows);
  const auto& missing = encoder.all_missing_fields();
  CHECK(std::find(missing.begin(), missing.end(), "ldl") != missing.end());
  CHECK(std::find(missing.begin(), missing.end(), "nihss_baseline") == missing.end());
}

TEST_CASE("svr: constant labels") {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  SplitMix64 rng(1);
  for (int i = 0; i < 30; ++i) {
    x.push_back({rng.uniform() * 2 - 1, rng.uniform() * 2 - 1});
    y.push_back(3.0);
  }
  const auto model = train_svr(x, y, {1.0, 0.5, 200, 0.1, 3});
  for (const auto& row : x) {
    CHECK(model.raw_score(row) >= 2.5 - 1e-9);
    CHECK(model.raw_score(row) <= 3.5 + 1e-9);
  }
  for (double w : model.weights) CHECK(std::fabs(w) < 0.05);
}

TEST_CASE("svr: three collinear points against least squares") {
  const std::vector<std::vector<double>> x{{0}, {1}, {2}};
  const std::vector<double> y{0, 1, 2};
  const auto model = train_svr(x, y, {10.0, 0.0, 2000, 0.1, 7});
  const auto beta = oracle::least_squares(x, y);
  const double expected = beta[0] + beta[1] * 1.5;
  CHECK(expected == doctest::Approx(1.5));
  CHECK(std::fabs(model.raw_score(std::vector<double>{1.5}) - expected) <= 0.1);
}

TEST_CASE("svr: deterministic and monotone trace") {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  SplitMix64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    x.push_back({a, b});
    y.push_back(std::round(3 * a + 2 * b));
  }
  const auto m1 = train_svr(x, y);
  const auto m2 = train_svr(x, y);
  CHECK(m1.weights == m2.weights);
  CHECK(m1.bias == m2.bias);
  for (std::size_t i = 1; i < m1.objective_trace.size(); ++i) CHECK(m1.objective_trace[i] <= m1.objective_trace[i - 1]);
  CHECK(m1.final_objective() == doctest::Approx(svr_objective(m1, x, y)));
  const auto back = svr_from_json(json::parse(to_json(m1).dump()));
  CHECK(back.weights == m1.weights);
}

TEST_CASE("svr: input validation") {
  CHECK_THROWS_AS(train_svr(std::vector<std::vector<double>>{{1}}, std::vector<double>{1}), std::invalid_argument);
  CHECK_THROWS_AS(train_svr(std::vector<std::vector<double>>{{1}, {NAN}}, std::vector<double>{1, 2}),
                  std::invalid_argument);
}

TEST_CASE("predict_clinical_ml: rounding and clamping") {
  CHECK(score_to_mrs(2.5) == 2);
  CHECK(score_to_mrs(3.5) == 4);
  CHECK(score_to_mrs(-0.7) == 0);
  CHECK(score_to_mrs(6.9) == 6);
  SvrModel model;
  model.weights = {1.0};
  model.bias = 0.0;
  const auto p = predict_clinical_ml(model, std::vector<double>{2.5}, "p1");
  CHECK(p.predicted_mrs == 2);
  CHECK(p.raw_score == doctest::Approx(2.5));
  CHECK(p.engine == pipeline::Engine::clinical_ml);
  CHECK_THROWS_AS(predict_clinical_ml(model, std::vector<double>{1.0, 2.0}, "p1"), std::invalid_argument);
}
