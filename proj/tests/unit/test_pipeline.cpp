#include <doctest.h>

#include <sys/file.h>
#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <mutex>
#include <sstream>

#include "cope/backends/client.hpp"
#include "cope/pipeline/parse.hpp"
#include "cope/pipeline/predictors.hpp"
#include "cope/pipeline/run.hpp"
#include "cope/pipeline/template.hpp"
#include "cope/synth/generate.hpp"
#include "cope/synth/oracle.hpp"
#include "cope/util/error.hpp"
#include "fixtures.hpp"
#include "temp_dir.hpp"

using namespace cope;
using namespace cope::pipeline;
namespace fs = std::filesystem;

namespace {

std::string envelope(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

// Replies from a fixed script, one entry per call; records every request body.
class ScriptedTransport : public backends::Transport {
 public:
  explicit ScriptedTransport(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  backends::HttpResponse post_json(const std::string&, const backends::Headers&, const std::string& body,
                                   std::chrono::milliseconds) override {
    std::lock_guard lock(mutex_);
    bodies.push_back(json::parse(body));
    const auto i = std::min(bodies.size() - 1, replies_.size() - 1);
    return {200, envelope(replies_[i])};
  }
  std::vector<json> bodies;

 private:
  std::mutex mutex_;
  std::vector<std::string> replies_;
};

std::shared_ptr<backends::ChatClient> scripted_client(std::shared_ptr<ScriptedTransport> transport) {
  backends::BackendConfig config;
  config.kind = backends::BackendKind::http_chat;
  config.base_url = "http://fake.invalid";
  config.model_name = "scripted";
  config.auth_token_env = std::nullopt;
  return std::make_shared<backends::ChatClient>(config, nullptr, std::move(transport));
}

std::shared_ptr<backends::ChatClient> mock_client(int noise = 0) {
  backends::BackendConfig config;
  config.mock_noise_level = noise;
  return std::make_shared<backends::ChatClient>(config);
}

CopePredictor mock_cope(std::shared_ptr<backends::ChatClient> client) {
  return CopePredictor(client, client, PromptTemplate::builtin("reasoning"), PromptTemplate::builtin("extraction"));
}

corpus::Cohort synthetic(std::size_t n, std::uint64_t seed = 3) {
  synth::SynthConfig config;
  config.n = n;
  config.seed = seed;
  return synth::generate_corpus(config).cohort;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timing(const fs::path& predictions) {
  std::string out;
  std::istringstream in(read_file(predictions));
  for (std::string line; std::getline(in, line);) {
    auto j = ojson::parse(line);
    j.erase("extraction_latency_ms");
    if (j["reasoning_ref"].is_object()) j["reasoning_ref"].erase("latency_ms");
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("render_prompt: verbatim substitution without re-expansion") {
  const auto tpl = PromptTemplate::builtin("reasoning");
  CHECK(tpl.placeholders == std::set<std::string>{"discharge_summary"});
  const std::string note = "Patient admitted with {{reasoning_text}} and \\n raw text.";
  const auto req = render_prompt(tpl, {{"discharge_summary", note}});
  REQUIRE(req.messages.size() == 1);
  CHECK(req.messages[0].role == backends::Role::user);
  CHECK(req.messages[0].content.find(note) != std::string::npos);
  CHECK(req.messages[0].content.find("{{discharge_summary}}") == std::string::npos);
}

TEST_CASE("render_prompt: missing and unknown bindings") {
  const auto tpl = PromptTemplate::builtin("extraction");
  try {
    render_prompt(tpl, {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string all = e.what();
    for (const auto& d : e.details()) all += d;
    CHECK(all.find("reasoning_text") != std::string::npos);
  }
  CHECK_THROWS_AS(render_prompt(tpl, {{"reasoning_text", "x"}, {"extra", "y"}}), ConfigError);
}

TEST_CASE("templates: parsing rules and role layouts") {
  CHECK_THROWS_AS(PromptTemplate::from_text("t", "open {{name"), ConfigError);
  CHECK_THROWS_AS(PromptTemplate::from_text("t", "bad {{Name}}"), ConfigError);
  CHECK_THROWS_AS(PromptTemplate::from_text("t", "no user", RoleLayout::system_and_user), ConfigError);
  const auto tpl = PromptTemplate::from_text("t", "be terse\n[user]\nnote: {{discharge_summary}}",
                                             RoleLayout::system_and_user);
  const auto req = render_prompt(tpl, {{"discharge_summary", "N"}});
  REQUIRE(req.messages.size() == 2);
  CHECK(req.messages[0].role == backends::Role::system);
  CHECK(req.messages[0].content == "be terse");
  CHECK(req.messages[1].content == "note: N");
  CHECK(tpl.hash().size() == 64);
  CHECK(tpl.hash() != PromptTemplate::from_text("t", "other").hash());
}

TEST_CASE("parse_mrs: examples and error classes") {
  CHECK(parse_mrs("4").value == 4);
  CHECK_FALSE(parse_mrs("4").lenient);
  CHECK(parse_mrs("  6\n").value == 6);
  const auto sentence = parse_mrs("The most likely mRS score is 3.");
  CHECK(sentence.value == 3);
  CHECK(sentence.lenient);
  CHECK(parse_mrs("1 or 2").error == ParseError::ambiguous);
  CHECK(parse_mrs("score: 90 days, mRS 5").value == 5);
  CHECK(parse_mrs("7").error == ParseError::out_of_range);
  CHECK(parse_mrs("-1").error == ParseError::out_of_range);
  CHECK(parse_mrs("").error == ParseError::no_candidate);
  CHECK(parse_mrs("no idea").error == ParseError::no_candidate);
  CHECK(parse_mrs("mRS2").error == ParseError::no_candidate);
  CHECK(parse_mrs("2, final answer 2").value == 2);
  CHECK(parse_mrs("3-4").error == ParseError::ambiguous);
}

TEST_CASE("parse_mrs is total over arbitrary bytes") {
  std::uint64_t state = 99;
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    const int len = static_cast<int>(state % 24);
    for (int k = 0; k < len; ++k) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      s.push_back(static_cast<char>(state >> 56));
    }
    const auto out = parse_mrs(s);
    CHECK(out.value.has_value() != out.error.has_value());
    if (out.value) {
      CHECK(*out.value >= 0);
      CHECK(*out.value <= 6);
    }
  }
}

TEST_CASE("cope: mock backend recovers the oracle score in one attempt") {
  synth::SynthConfig config;
  config.n = 30;
  config.seed = 11;
  const auto corpus = synth::generate_corpus(config);
  auto predictor = mock_cope(mock_client());
  for (std::size_t i = 0; i < corpus.cohort.size(); ++i) {
    const auto rec = predictor.predict(corpus.cohort.records()[i]);
    CHECK(rec.status == PredictionStatus::ok);
    CHECK(rec.predicted_mrs == synth::oracle_mrs(corpus.profiles[i]));
    CHECK(rec.attempts == 1);
    REQUIRE(rec.reasoning.has_value());
    CHECK(rec.extraction_prompt.find(rec.reasoning->reasoning_text) != std::string::npos);
    CHECK(rec.extraction_prompt.find(corpus.cohort.records()[i].note_text) == std::string::npos);
  }
}

TEST_CASE("cope: ambiguous extraction is retried at a higher temperature") {
  auto reasoning = std::make_shared<ScriptedTransport>(std::vector<std::string>{"long reasoning"});
  auto extraction = std::make_shared<ScriptedTransport>(std::vector<std::string>{"1 or 2", "2"});
  CopePredictor predictor(scripted_client(reasoning), scripted_client(extraction), PromptTemplate::builtin("reasoning"),
                          PromptTemplate::builtin("extraction"));
  const auto record = note_record("p1", "some note");
  const auto rec = predictor.predict(record);
  CHECK(rec.status == PredictionStatus::ok);
  CHECK(rec.predicted_mrs == 2);
  CHECK(rec.attempts == 2);
  CHECK(rec.raw_extraction_output == "2");
  REQUIRE(extraction->bodies.size() == 2);
  CHECK(extraction->bodies[0]["temperature"].get<double>() == doctest::Approx(0.0));
  CHECK(extraction->bodies[1]["temperature"].get<double>() == doctest::Approx(kRetryTemperatureStep));
  CHECK(extraction->bodies[0]["max_tokens"] == backends::kExtractionMaxTokens);
  CHECK(reasoning->bodies.size() == 1);
  CHECK(reasoning->bodies[0]["max_tokens"] == backends::kReasoningMaxTokens);
}

TEST_CASE("cope: retries exhausted gives parse_failed with raw text kept") {
  auto reasoning = std::make_shared<ScriptedTransport>(std::vector<std::string>{"thinking"});
  auto extraction = std::make_shared<ScriptedTransport>(std::vector<std::string>{"unclear"});
  CopePredictor predictor(scripted_client(reasoning), scripted_client(extraction), PromptTemplate::builtin("reasoning"),
                          PromptTemplate::builtin("extraction"), LlmOptions{std::nullopt, 8, 2});
  const auto rec = predictor.predict(note_record("p1", "note"));
  CHECK(rec.status == PredictionStatus::parse_failed);
  CHECK_FALSE(rec.predicted_mrs.has_value());
  CHECK(rec.attempts == 3);
  CHECK(rec.raw_extraction_output == "unclear");
  CHECK(rec.parse_error == "no_candidate");
  CHECK(rec.reasoning->reasoning_text == "thinking");
}

TEST_CASE("predictors: empty note fails before any backend call") {
  auto transport = std::make_shared<ScriptedTransport>(std::vector<std::string>{"3"});
  auto client = scripted_client(transport);
  CopePredictor cope_pred(client, client, PromptTemplate::builtin("reasoning"), PromptTemplate::builtin("extraction"));
  SingleStepPredictor single(client, PromptTemplate::builtin("single_step"));
  CHECK_THROWS_AS(cope_pred.predict(note_record("p1", "")), DataError);
  CHECK_THROWS_AS(single.predict(note_record("p1", "")), DataError);
  CHECK(transport->bodies.empty());
}

TEST_CASE("single step: one call, no reasoning, deterministic") {
  auto transport = std::make_shared<ScriptedTransport>(std::vector<std::string>{"3"});
  SingleStepPredictor single(scripted_client(transport), PromptTemplate::builtin("single_step"));
  const auto rec = single.predict(note_record("p1", "a note"));
  CHECK(rec.predicted_mrs == 3);
  CHECK_FALSE(rec.reasoning.has_value());
  CHECK(transport->bodies.size() == 1);

  const auto cohort = synthetic(5);
  SingleStepPredictor mocked(mock_client(1), PromptTemplate::builtin("single_step"));
  for (const auto& r : cohort.records()) {
    auto a = to_json(mocked.predict(r));
    auto b = to_json(mocked.predict(r));
    a.erase("extraction_latency_ms");
    b.erase("extraction_latency_ms");
    CHECK(a == b);
  }
}

TEST_CASE("prediction JSON round trip") {
  PredictionRecord r;
  r.patient_id = "x";
  r.predicted_mrs = 4;
  r.reasoning = ReasoningArtifact{"x", "why", "m", 12.5};
  r.attempts = 2;
  r.lenient_parse = true;
  const auto back = prediction_from_json(json::parse(to_json(r).dump()));
  CHECK(back.predicted_mrs == 4);
  CHECK(back.reasoning->reasoning_text == "why");
  CHECK(back.attempts == 2);
  CHECK(back.lenient_parse);
}

TEST_CASE("run_cohort: 200 synthetic records all ok, sorted ledger, manifest") {
  TempDir tmp;
  const auto cohort = synthetic(200);
  auto predictor = mock_cope(mock_client());
  const auto manifest = run_cohort(cohort, predictor, run_options(tmp.path() / "run", 4));
  CHECK(manifest.counts.ok == 200);
  CHECK(manifest.counts.total() == 200);
  CHECK(manifest.complete);
  CHECK(manifest.cohort_hash == cohort.content_hash());
  const auto loaded = load_predictions(tmp.path() / "run");
  REQUIRE(loaded.size() == 200);
  CHECK(std::is_sorted(loaded.begin(), loaded.end(),
                       [](const auto& a, const auto& b) { return a.patient_id < b.patient_id; }));
  for (const auto& p : loaded) {
    CHECK(p.predicted_mrs == cohort.find(p.patient_id)->mrs_90d);
    CHECK(fs::exists(tmp.path() / "run" / "reasoning" / (sanitize_id(p.patient_id) + ".txt")));
  }
  const auto m = load_manifest(tmp.path() / "run");
  CHECK(m.run_id == manifest.run_id);
  CHECK(m.template_hashes.size() == 2);
}

TEST_CASE("run_cohort: interrupted run resumes with exactly the remaining calls") {
  TempDir tmp;
  const auto cohort = synthetic(200);
  auto first_client = mock_client();
  auto first = mock_cope(first_client);
  auto options = run_options(tmp.path() / "run", 4, 50);
  const auto partial = run_cohort(cohort, first, options);
  CHECK(partial.counts.ok == 50);
  CHECK_FALSE(partial.complete);
  CHECK(first_client->backend_calls() == 100);

  auto second_client = mock_client();
  auto second = mock_cope(second_client);
  const auto done = run_cohort(cohort, second, run_options(tmp.path() / "run", 4));
  CHECK(done.new_predictions == 150);
  CHECK(second_client->backend_calls() == 2 * 150);
  CHECK(done.counts.ok == 200);
  CHECK(done.complete);
}

TEST_CASE("run_cohort: cancellation leaves a resumable run") {
  TempDir tmp;
  const auto cohort = synthetic(20);
  std::atomic<bool> cancel{true};
  auto predictor = mock_cope(mock_client());
  auto options = run_options(tmp.path() / "run", 2);
  options.cancel = &cancel;
  const auto m = run_cohort(cohort, predictor, options);
  CHECK(m.counts.total() == 0);
  CHECK_FALSE(m.complete);
  const auto resumed = run_cohort(cohort, predictor, run_options(tmp.path() / "run", 2));
  CHECK(resumed.counts.ok == 20);
}

TEST_CASE("run_cohort: empty subset is a valid run") {
  TempDir tmp;
  auto predictor = mock_cope(mock_client());
  const auto m = run_cohort(corpus::Cohort{}, predictor, run_options(tmp.path() / "run", 4));
  CHECK(m.counts.total() == 0);
  CHECK(m.complete);
  CHECK(fs::exists(tmp.path() / "run" / "manifest.json"));
}

TEST_CASE("run_cohort: byte-identical ledgers across runs and concurrency") {
  TempDir tmp;
  const auto cohort = synthetic(60, 17);
  auto a = mock_cope(mock_client(1));
  auto b = mock_cope(mock_client(1));
  run_cohort(cohort, a, run_options(tmp.path() / "a", 1));
  run_cohort(cohort, b, run_options(tmp.path() / "b", 8));
  CHECK(without_timing(tmp.path() / "a" / "predictions.jsonl") ==
        without_timing(tmp.path() / "b" / "predictions.jsonl"));
}

TEST_CASE("run_cohort: torn trailing line is skipped and the record redone") {
  TempDir tmp;
  const auto cohort = synthetic(10);
  auto predictor = mock_cope(mock_client());
  run_cohort(cohort, predictor, run_options(tmp.path() / "run", 2, 4));
  {
    std::ofstream out(tmp.path() / "run" / "predictions.jsonl", std::ios::app);
    out << R"({"patient_id": "half)";
  }
  CHECK(load_predictions(tmp.path() / "run").size() == 4);
  const auto m = run_cohort(cohort, predictor, run_options(tmp.path() / "run", 2));
  CHECK(m.counts.ok == 10);
  CHECK(load_predictions(tmp.path() / "run").size() == 10);
}

TEST_CASE("run_cohort: a locked run directory is refused") {
  TempDir tmp;
  fs::create_directories(tmp.path() / "run");
  const int fd = ::open((tmp.path() / "run" / ".lock").c_str(), O_CREAT | O_RDWR, 0644);
  REQUIRE(fd >= 0);
  REQUIRE(::flock(fd, LOCK_EX | LOCK_NB) == 0);
  const pid_t pid = fork();
  if (pid == 0) {
    auto predictor = mock_cope(mock_client());
    try {
      run_cohort(synthetic(3), predictor, run_options(tmp.path() / "run", 1));
      _exit(0);
    } catch (const IoError&) {
      _exit(7);
    } catch (...) {
      _exit(1);
    }
  }
  int status = 0;
  waitpid(pid, &status, 0);
  CHECK(WEXITSTATUS(status) == 7);
  ::close(fd);
}

TEST_CASE("sanitize_id") {
  CHECK(sanitize_id("abc-1.2_x") == "abc-1.2_x");
  const auto s = sanitize_id("a/b c");
  CHECK(s.rfind("a_b_c", 0) == 0);
  CHECK(s != sanitize_id("a_b c"));
  CHECK(s.find('/') == std::string::npos);
}

TEST_CASE("clinical ML predictor yields in-range integers with raw scores") {
  const auto cohort = synthetic(120, 4);
  const auto model = train_clinical_ml(cohort);
  ClinicalMlPredictor predictor(model);
  for (const auto& r : cohort.records()) {
    const auto rec = predictor.predict(r);
    REQUIRE(rec.status == PredictionStatus::ok);
    CHECK(*rec.predicted_mrs >= 0);
    CHECK(*rec.predicted_mrs <= 6);
    CHECK(rec.raw_score.has_value());
  }
  CHECK_THROWS_AS(train_clinical_ml(synthetic(1)), DataError);
}
