#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cope/cli/commands.hpp"
#include "cope/cli/config.hpp"
#include "cope/util/error.hpp"
#include "temp_dir.hpp"

using namespace cope;
using namespace cope::cli;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(std::vector<std::string> args) {
  args.insert(args.begin(), {"--log-level", "off"});
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string all_text(const ConfigError& e) {
  std::string s = e.what();
  for (const auto& d : e.details()) s += "\n" + d;
  return s;
}

}  // namespace

TEST_CASE("config: defaults") {
  const auto c = default_config();
  CHECK(c.backends.count("mock") == 1);
  CHECK(c.split.seed == 20);
  CHECK(c.stats.q == 0.05);
  CHECK(c.run.reasoning_backend == "mock");
}

TEST_CASE("config: full document and overrides") {
  const std::string text = R"(
[run]
concurrency = 2
reasoning_backend = "local"

[split]
fraction = "1/4"
seed = 7

[stats]
resamples = 500
seed = 3

[backends.local]
kind = "http_chat"
base_url = "http://127.0.0.1:8000"
model_name = "llama"
timeout_s = 30
max_retries = 5
)";
  const auto c = parse_config(text, {"stats.q=0.1", "backends.local.temperature=0.3", "run.concurrency=6"});
  CHECK(c.run.concurrency == 6);
  CHECK(c.split.seed == 7);
  CHECK(c.stats.bootstrap.resamples == 500);
  CHECK(c.stats.q == doctest::Approx(0.1));
  const auto& b = c.backend("local");
  CHECK(b.kind == backends::BackendKind::http_chat);
  CHECK(b.request_timeout == std::chrono::seconds(30));
  CHECK(b.max_retries == 5);
  CHECK(b.temperature == doctest::Approx(0.3));
  CHECK_THROWS_AS(c.backend("nope"), ConfigError);
}

TEST_CASE("config: every problem is reported together") {
  const std::string text = R"(
[run]
concurency = 2

[stats]
resamples = 10

[backends.remote]
kind = "http_chat"
)";
  try {
    parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const auto s = all_text(e);
    CHECK(s.find("concurency") != std::string::npos);
    CHECK(s.find("resamples") != std::string::npos);
    CHECK(s.find("base_url") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("not = [valid"), ConfigError);
  CHECK_THROWS_AS(parse_config("", {"nosection"}), ConfigError);
  CHECK_THROWS_AS(parse_config("[templates]\nreasoning = \"missing.txt\""), ConfigError);
}

TEST_CASE("cli: usage errors and config errors map to exit 2") {
  CHECK(invoke({}).code == kExitConfig);
  CHECK(invoke({"bogus"}).code == kExitConfig);
  const auto r = invoke({"--set", "stats.resamples=5", "synth", "--out", "x.jsonl"});
  CHECK(r.code == kExitConfig);
  const auto err = json::parse(r.err);
  CHECK(err["error"]["kind"] == "config");
}

TEST_CASE("cli: missing corpus is a data error") {
  TempDir tmp;
  const auto r = invoke({"ingest", "--corpus", (tmp.path() / "none.jsonl").string(), "--out",
                      (tmp.path() / "o.jsonl").string()});
  CHECK(r.code == kExitData);
  CHECK(json::parse(r.err).contains("error"));
}

TEST_CASE("cli: end-to-end over a synthetic corpus") {
  TempDir tmp;
  const auto p = [&](const std::string& name) { return (tmp.path() / name).string(); };
  const std::vector<std::string> cache{"--set", "paths.cache_dir=\"" + p("cache") + "\""};
  auto with_cache = [&](std::vector<std::string> args) {
    args.insert(args.begin(), cache.begin(), cache.end());
    return invoke(args);
  };

  REQUIRE(invoke({"synth", "--out", p("raw.jsonl"), "--profiles", p("profiles.jsonl"), "--n", "150", "--seed", "4"})
              .code == kExitOk);
  REQUIRE(invoke({"ingest", "--corpus", p("raw.jsonl"), "--out", p("canon.jsonl")}).code == kExitOk);
  REQUIRE(invoke({"exclude", "--cohort", p("canon.jsonl"), "--out", p("cohort.jsonl"), "--report", p("excl.json")})
              .code == kExitOk);
  REQUIRE(invoke({"split", "--cohort", p("cohort.jsonl"), "--out", p("split.json"), "--demographics", p("demo.json")})
              .code == kExitOk);
  CHECK(fs::exists(p("demo.json")));

  const auto cope_run = with_cache({"run", "--engine", "cope", "--cohort", p("cohort.jsonl"), "--split",
                                    p("split.json"), "--subset", "test", "--run", p("run_cope")});
  REQUIRE(cope_run.code == kExitOk);
  const auto manifest = read_json(p("run_cope/manifest.json"));
  CHECK(manifest["complete"] == true);
  CHECK(manifest["subset"] == "test");

  // Same directory, different engine: refused.
  CHECK(with_cache({"run", "--engine", "single_step", "--cohort", p("cohort.jsonl"), "--split", p("split.json"),
                    "--subset", "test", "--run", p("run_cope")})
            .code != kExitOk);

  REQUIRE(invoke({"run", "--engine", "clinical_ml", "--cohort", p("cohort.jsonl"), "--split", p("split.json"),
               "--subset", "test", "--run", p("run_ml")})
              .code == kExitOk);
  CHECK(fs::exists(p("run_ml/model.json")));
  CHECK(invoke({"run", "--engine", "clinical_ml", "--cohort", p("cohort.jsonl"), "--run", p("run_ml2")}).code ==
        kExitConfig);

  REQUIRE(invoke({"eval", "--run", p("run_cope")}).code == kExitOk);
  const auto metrics = read_json(p("run_cope/metrics.json"));
  CHECK(metrics["mae"]["point"] == 0.0);
  CHECK(metrics["acc"]["point"] == 1.0);

  const auto cmp = invoke({"compare", "--a", p("run_cope"), "--b", p("run_ml"), "--out", p("cmp.json")});
  REQUIRE(cmp.code == kExitOk);
  const auto cmp_json = read_json(p("cmp.json"));
  CHECK((cmp_json.is_array() || cmp_json.is_object()));

  REQUIRE(invoke({"subgroup", "--run", p("run_cope"), "--axes", "evt,sex"}).code == kExitOk);
  CHECK(fs::exists(p("run_cope/forest.json")));
  CHECK(fs::exists(p("run_cope/forest.csv")));

  REQUIRE(invoke({"report", "--run", p("run_cope"), "--format", "csv,json,svg"}).code == kExitOk);
  for (const auto* f : {"metrics.csv", "forest.csv", "report.json", "forest.svg"}) {
    CHECK(fs::exists(tmp.path() / "run_cope" / "report" / f));
  }
}

TEST_CASE("cli: limited run reports partial and resumes") {
  TempDir tmp;
  const auto p = [&](const std::string& name) { return (tmp.path() / name).string(); };
  REQUIRE(invoke({"synth", "--out", p("c.jsonl"), "--n", "30"}).code == kExitOk);
  const std::vector<std::string> base{"--set",     "paths.cache_dir=\"" + p("cache") + "\"",
                                      "run",       "--engine",
                                      "cope",      "--cohort",
                                      p("c.jsonl"), "--run",
                                      p("r")};
  auto limited = base;
  limited.insert(limited.end(), {"--limit", "10"});
  CHECK(invoke(limited).code == kExitPartial);
  CHECK(read_json(p("r/manifest.json"))["counts"]["ok"] == 10);
  CHECK(invoke(base).code == kExitOk);
  CHECK(read_json(p("r/manifest.json"))["counts"]["ok"] == 30);
}

TEST_CASE("cli: unreachable backend marks records failed and exits partial") {
  TempDir tmp;
  const auto p = [&](const std::string& name) { return (tmp.path() / name).string(); };
  REQUIRE(invoke({"synth", "--out", p("c.jsonl"), "--n", "3"}).code == kExitOk);
  const auto r = invoke({"--set", "backends.dead.kind=\"http_chat\"", "--set",
                      "backends.dead.base_url=\"http://127.0.0.1:1\"", "--set", "backends.dead.max_retries=0",
                      "--set", "backends.dead.model_name=\"x\"", "run", "--engine", "single_step", "--backend",
                      "dead", "--cohort", p("c.jsonl"), "--run", p("r"), "--no-cache"});
  CHECK(r.code == kExitPartial);
  CHECK(read_json(p("r/manifest.json"))["counts"]["backend_failed"] == 3);
}

TEST_CASE("exit codes by error kind") {
  CHECK(exit_code_for(ErrorKind::config) == 2);
  CHECK(exit_code_for(ErrorKind::data) == 3);
  CHECK(exit_code_for(ErrorKind::backend) == 4);
}

TEST_CASE("config: shipped example parses") {
  const auto c = load_config(fs::path(COPE_SOURCE_DIR) / "config" / "example.toml");
  CHECK(c.backend("local").kind == backends::BackendKind::http_chat);
  CHECK(c.run.reasoning_backend == "local");
}
