#include "cope/synth/generate.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <span>

#include "cope/corpus/text.hpp"
#include "cope/features/grammar.hpp"
#include "cope/util/error.hpp"
#include "cope/util/rng.hpp"

namespace cope::synth {

using features::Destination;
using features::StructuredFeatures;
using features::Tici;

namespace {

// Phrasing bank v1. Every sentence below is recovered by the v1 extraction
// grammar; filler sentences contain no digits and no grammar keywords.

template <std::size_t N>
std::string_view pick(SplitMix64& rng, const std::array<std::string_view, N>& options) {
  return options[rng.below(N)];
}

std::string fill(std::string_view pattern, std::string_view value) {
  std::string out(pattern);
  const auto pos = out.find("{}");
  if (pos != std::string::npos) out.replace(pos, 2, value);
  return out;
}

constexpr std::array<std::string_view, 3> kMaleWords = {"man", "male", "gentleman"};
constexpr std::array<std::string_view, 3> kFemaleWords = {"woman", "female", "lady"};
constexpr std::array<std::string_view, 3> kPresentations = {
    "who presented with acute onset of left-sided weakness and facial droop.",
    "who presented with sudden aphasia and right-sided weakness.",
    "who was found with acute gaze deviation and hemiparesis."};

constexpr std::array<std::string_view, 2> kPriorStrokeYes = {"Past medical history includes prior stroke.",
                                                             "The patient has a history of ischemic stroke."};
constexpr std::array<std::string_view, 2> kPriorStrokeNo = {"No prior stroke.", "There is no history of stroke."};
constexpr std::array<std::string_view, 2> kHtnYes = {"History is notable for hypertension.",
                                                     "Known HTN, managed with oral agents."};
constexpr std::array<std::string_view, 2> kHtnNo = {"No known hypertension.", "There is no history of hypertension."};
constexpr std::array<std::string_view, 2> kDmYes = {"Type 2 diabetes mellitus treated with oral agents.",
                                                    "Comorbid diabetes requiring insulin."};
constexpr std::array<std::string_view, 2> kDmNo = {"No known diabetes.", "There is no history of diabetes mellitus."};
constexpr std::array<std::string_view, 2> kAfYes = {"History of atrial fibrillation on anticoagulation.",
                                                    "Atrial fibrillation was noted on telemetry."};
constexpr std::array<std::string_view, 2> kAfNo = {"No history of atrial fibrillation.", "No known afib."};
constexpr std::array<std::string_view, 2> kTransferYes = {"The patient was transferred from an outside hospital.",
                                                          "Care began after transfer from an outside facility."};
constexpr std::array<std::string_view, 2> kTransferNo = {
    "The patient presented directly to our emergency department.",
    "The patient presented directly to this hospital."};

constexpr std::array<std::string_view, 3> kNihssBaseline = {"Baseline NIHSS was {}.", "NIHSS on arrival was {}.",
                                                            "Admission NIHSS score of {}."};
constexpr std::array<std::string_view, 2> kNihss24h = {"NIHSS at 24 hours was {}.", "The 24-hour NIHSS was {}."};
constexpr std::array<std::string_view, 3> kNihssDischarge = {"Discharge NIHSS was {}.", "NIHSS at discharge: {}.",
                                                             "NIHSS upon discharge was {}."};
constexpr std::array<std::string_view, 2> kHba1c = {"HbA1c was {}%.", "Hemoglobin A1c of {}%."};
constexpr std::array<std::string_view, 2> kLdl = {"LDL cholesterol was {} mg/dL.", "LDL: {} mg/dL."};

constexpr std::array<std::string_view, 2> kTpaYes = {"The patient received IV tPA.",
                                                     "The patient was given intravenous alteplase."};
constexpr std::array<std::string_view, 2> kTpaNo = {"The patient did not receive IV tPA because of the time window.",
                                                    "The patient was not a candidate for intravenous alteplase."};
constexpr std::array<std::string_view, 2> kEvtYes = {"The patient underwent mechanical thrombectomy.",
                                                     "The patient underwent endovascular thrombectomy."};
constexpr std::array<std::string_view, 2> kEvtNo = {"The patient was not a candidate for thrombectomy.",
                                                    "The patient did not undergo mechanical thrombectomy."};
constexpr std::array<std::string_view, 2> kTici = {"Final reperfusion was TICI {}.", "Reperfusion grade was TICI {}."};
constexpr std::array<std::string_view, 2> kComplicationYes = {
    "The procedure was complicated by a groin hematoma.",
    "The procedure was complicated by a small vessel perforation."};
constexpr std::string_view kComplicationNo = "There were no procedural complications.";
constexpr std::string_view kNoProcedure = "No procedure was performed, consistent with TICI 0.";

constexpr std::array<std::string_view, 6> kDestination = {
    "The patient was discharged home with outpatient therapy.",
    "The patient was discharged to acute inpatient rehabilitation.",
    "The patient was discharged to a skilled nursing facility.",
    "The patient was discharged to a long-term acute care hospital.",
    "The patient was discharged to hospice.",
    "The patient was discharged to another facility."};

constexpr std::array<std::string_view, 17> kFiller = {
    "Physical therapy and occupational therapy evaluated the patient during the admission.",
    "Speech pathology performed a bedside swallow evaluation.",
    "The patient was monitored on telemetry without events.",
    "Neurological checks were performed at regular intervals.",
    "Brain imaging demonstrated an acute infarct in the territory corresponding to the deficits.",
    "Vascular imaging of the head and neck was reviewed with the neurointerventional team.",
    "Echocardiography was obtained to evaluate for a cardioembolic source.",
    "Antiplatelet therapy was started per protocol.",
    "Statin therapy was initiated for secondary prevention.",
    "Blood pressure was managed within permissive parameters.",
    "Venous thromboembolism prophylaxis was provided.",
    "The family was updated regarding the plan of care.",
    "Case management coordinated the transition of care.",
    "Medications were reconciled before departure.",
    "Follow-up was arranged in the vascular neurology clinic.",
    "Nursing reported adequate oral intake.",
    "Lipid and glycemic management were reviewed with the patient."};

std::string num_text(double v, bool one_decimal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, one_decimal ? "%.1f" : "%.0f", v);
  return buf;
}

// Samples a consistent profile whose oracle score equals `target`.
StructuredFeatures sample_features(int target, SplitMix64& rng) {
  StructuredFeatures f;
  bool elderly = false;
  if (target == 6) {
    elderly = true;
  } else if (target >= 1) {
    elderly = rng.chance(0.2);
  }
  const int base = elderly ? target - 1 : target;
  f.age_years = elderly ? rng.between(81, 95) : rng.between(25, 80);
  static constexpr std::array<std::array<int, 2>, 6> kBands = {{{0, 0}, {1, 4}, {5, 9}, {10, 14}, {15, 20}, {21, 30}}};
  const int discharge = rng.between(kBands[base][0], kBands[base][1]);
  f.sex = rng.chance(0.55) ? corpus::Sex::male : corpus::Sex::female;
  f.prior_stroke = rng.chance(0.2);
  f.hypertension = rng.chance(0.65);
  f.diabetes = rng.chance(0.27);
  f.atrial_fibrillation = rng.chance(0.3);
  f.transfer_status = rng.chance(0.5);
  f.iv_tpa = rng.chance(0.45);
  f.evt = rng.chance(0.78);
  f.procedure_complication = *f.evt && rng.chance(0.15);
  if (*f.evt) {
    static constexpr std::array<Tici, 5> kGrades = {Tici::t1, Tici::t2a, Tici::t2b, Tici::t2c, Tici::t3};
    f.tici = kGrades[rng.below(kGrades.size())];
  } else {
    f.tici = Tici::t0;
  }
  f.nihss_discharge = discharge;
  if (*f.procedure_complication) {
    f.nihss_24h = std::max(0, discharge - rng.between(0, 4));
  } else {
    f.nihss_24h = std::min(42, discharge + rng.between(0, 6));
  }
  f.nihss_baseline = std::min(42, *f.nihss_24h + rng.between(0, 8));
  f.hba1c = rng.between(48, 110) / 10.0;
  f.ldl = rng.between(45, 210);
  static constexpr std::array<std::array<Destination, 2>, 7> kDest = {{
      {Destination::home, Destination::home},
      {Destination::home, Destination::other},
      {Destination::home, Destination::acute_rehab},
      {Destination::acute_rehab, Destination::snf},
      {Destination::snf, Destination::ltac},
      {Destination::ltac, Destination::snf},
      {Destination::hospice, Destination::snf},
  }};
  f.discharge_destination = kDest[target][rng.below(2)];
  return f;
}

}  // namespace

std::string render_note(const LatentProfile& profile, std::uint64_t seed, std::size_t target_words) {
  const StructuredFeatures& f = profile.features;
  SplitMix64 rng(seed);
  auto yes_no = [&](bool v, const auto& yes, const auto& no) { return std::string(v ? pick(rng, yes) : pick(rng, no)); };

  std::string hpi = "The patient is a " + num_text(*f.age_years, false) + "-year-old " +
                    std::string(*f.sex == corpus::Sex::male ? pick(rng, kMaleWords) : pick(rng, kFemaleWords)) +
                    " " + std::string(pick(rng, kPresentations)) + " " +
                    yes_no(*f.transfer_status, kTransferYes, kTransferNo);
  std::string pmh = yes_no(*f.prior_stroke, kPriorStrokeYes, kPriorStrokeNo) + " " +
                    yes_no(*f.hypertension, kHtnYes, kHtnNo) + " " + yes_no(*f.diabetes, kDmYes, kDmNo) + " " +
                    yes_no(*f.atrial_fibrillation, kAfYes, kAfNo);
  std::string exam = fill(pick(rng, kNihssBaseline), std::to_string(*f.nihss_baseline));
  std::string treatment = yes_no(*f.iv_tpa, kTpaYes, kTpaNo) + " " + yes_no(*f.evt, kEvtYes, kEvtNo);
  if (*f.evt) {
    treatment += " " + fill(pick(rng, kTici), features::to_string(*f.tici)) + " " +
                 (*f.procedure_complication ? std::string(pick(rng, kComplicationYes)) : std::string(kComplicationNo));
  } else {
    treatment += " " + std::string(kNoProcedure);
  }
  std::string course = fill(pick(rng, kNihss24h), std::to_string(*f.nihss_24h));
  std::string labs = fill(pick(rng, kHba1c), num_text(*f.hba1c, true)) + " " +
                     fill(pick(rng, kLdl), num_text(*f.ldl, false));
  std::string discharge = fill(pick(rng, kNihssDischarge), std::to_string(*f.nihss_discharge)) + " " +
                          std::string(kDestination[static_cast<int>(*f.discharge_destination)]);

  auto assemble = [&](const std::string& course_text) {
    return std::string(kSyntheticNoteHeader) + "\n\nHISTORY OF PRESENT ILLNESS:\n" + hpi +
           "\n\nPAST MEDICAL HISTORY:\n" + pmh + "\n\nEXAMINATION:\n" + exam + "\n\nTREATMENT:\n" + treatment +
           "\n\nHOSPITAL COURSE:\n" + course_text + "\n\nLABORATORY DATA:\n" + labs + "\n\nDISCHARGE:\n" +
           discharge + "\n";
  };
  std::size_t words = corpus::word_count(assemble(course));
  while (words < target_words) {
    const std::string_view sentence = pick(rng, kFiller);
    course += " ";
    course += sentence;
    words += corpus::word_count(sentence);
  }
  return assemble(course);
}

SyntheticCorpus generate_corpus(const SynthConfig& config) {
  std::vector<std::string> problems;
  if (config.n == 0) problems.push_back("synth: n must be at least 1");
  if (config.noise_level < 0 || config.noise_level > 2) problems.push_back("synth: noise_level must be 0, 1 or 2");
  if (config.phrasing_bank_version != kPhrasingBankVersion) {
    problems.push_back("synth: unknown phrasing bank version " + std::to_string(config.phrasing_bank_version));
  }
  if (features::default_grammar().version() != kPhrasingBankVersion) {
    problems.push_back("synth: phrasing bank v" + std::to_string(kPhrasingBankVersion) +
                       " does not match extraction grammar v" +
                       std::to_string(features::default_grammar().version()));
  }
  if (!problems.empty()) throw ConfigError(problems.front(), problems);

  // Targets cycle through all seven scores, then get shuffled, so every score
  // appears once n >= 7.
  std::vector<int> targets(config.n);
  for (std::size_t i = 0; i < config.n; ++i) targets[i] = static_cast<int>(i % 7);
  SplitMix64 order_rng(substream_seed(config.seed, 0xC0FFEE));
  seeded_shuffle(std::span<int>(targets), order_rng);

  const double shift_probability = config.noise_level == 0 ? 0.0 : (config.noise_level == 1 ? 0.35 : 0.7);
  const std::size_t width = std::max<std::size_t>(4, std::to_string(config.n).size());

  SyntheticCorpus out;
  std::vector<corpus::PatientRecord> records;
  records.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    SplitMix64 rng(substream_seed(config.seed, i));
    LatentProfile p;
    const std::string number = std::to_string(i + 1);
    p.id = "synth-" + std::string(width - std::min(width, number.size()), '0') + number;
    p.seed = rng.next();
    p.noise_level = config.noise_level;
    p.features = sample_features(targets[i], rng);
    const int oracle = oracle_mrs(p);
    if (rng.chance(shift_probability)) {
      int shift = rng.chance(0.5) ? 1 : -1;
      if (oracle + shift < 0 || oracle + shift > 6) shift = -shift;
      p.label_shift = shift;
    }
    const double jitter = 0.6 + 0.8 * rng.uniform();
    const auto target_words = static_cast<std::size_t>(static_cast<double>(config.note_length_target) * jitter);

    corpus::PatientRecord r;
    r.id = p.id;
    r.note_text = render_note(p, p.seed, target_words);
    r.mrs_90d = oracle + p.label_shift;
    r.mrs_followup_days = rng.between(75, 105);
    r.age_years = static_cast<int>(*p.features.age_years);
    r.sex = p.features.sex;
    r.evt = p.features.evt;
    r.died_in_hospital = false;
    records.push_back(std::move(r));
    out.profiles.push_back(std::move(p));
  }
  out.cohort = corpus::Cohort(std::move(records),
                              corpus::Provenance{"synth:seed=" + std::to_string(config.seed), ""});
  return out;
}

std::string profiles_jsonl(const std::vector<LatentProfile>& profiles) {
  std::string out;
  for (const auto& p : profiles) {
    out += to_json(p).dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace cope::synth
