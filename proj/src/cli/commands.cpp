#include "cope/cli/commands.hpp"

#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cope/backends/client.hpp"
#include "cope/cli/config.hpp"
#include "cope/cli/report.hpp"
#include "cope/corpus/demographics.hpp"
#include "cope/corpus/exclusions.hpp"
#include "cope/corpus/ingest.hpp"
#include "cope/corpus/split.hpp"
#include "cope/stats/fdr.hpp"
#include "cope/stats/subgroups.hpp"
#include "cope/synth/generate.hpp"
#include "cope/util/io.hpp"

namespace fs = std::filesystem;

namespace cope::cli {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return kExitConfig;
    case ErrorKind::data: return kExitData;
    case ErrorKind::backend: return kExitBackend;
    case ErrorKind::io: return kExitData;
  }
  return kExitData;
}

namespace {

constexpr std::string_view kCohortSnapshot = "cohort.jsonl";
constexpr std::string_view kMetricsFile = "metrics.json";
constexpr std::string_view kForestJson = "forest.json";
constexpr std::string_view kForestCsv = "forest.csv";
constexpr std::string_view kModelFile = "model.json";

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::backend: return "backend";
    case ErrorKind::io: return "io";
  }
  return "data";
}

void print_error(std::ostream& err, std::string_view kind, const std::string& message,
                 const std::vector<std::string>& details = {}) {
  ojson e;
  e["kind"] = kind;
  e["message"] = message;
  e["details"] = details;
  err << ojson{{"error", e}}.dump() << "\n";
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

corpus::Cohort read_cohort(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ConfigError("cohort file not found: " + path.string());
  return corpus::ingest_corpus(path);
}

corpus::SplitAssignment read_split(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ConfigError("split file not found: " + path.string());
  try {
    return corpus::split_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw DataError("unreadable split file " + path.string() + ": " + e.what());
  }
}

json read_json(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw DataError("missing " + path.string());
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("unreadable " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const ojson& j) { write_file_atomic(path, j.dump(2) + "\n"); }

pipeline::PromptTemplate template_or_builtin(const fs::path& path, std::string_view name) {
  if (path.empty()) return pipeline::PromptTemplate::builtin(name);
  auto tpl = pipeline::PromptTemplate::load(path);
  tpl.name = std::string(name);
  return tpl;
}

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string log_level = "warn";

  // ingest / exclude / split / synth
  std::string corpus;
  std::string format = "auto";
  std::string out;
  std::string cohort;
  std::string report;
  std::string fraction;
  std::optional<std::uint64_t> seed;
  std::string demographics;
  std::optional<std::size_t> n;
  std::optional<int> noise;
  std::optional<std::size_t> length;
  std::string profiles;

  // run
  std::string engine;
  std::string backend;
  std::string extraction_backend;
  std::string subset = "all";
  std::string split;
  std::string run_dir;
  std::optional<std::size_t> limit;
  std::optional<unsigned> concurrency;
  bool no_cache = false;

  // compare / subgroup / report
  std::string a;
  std::vector<std::string> b;
  std::string family = "mae,acc,within1_acc";
  std::string axes;
  std::string formats = "csv,json,svg";
};

int cmd_ingest(const Options& o, std::ostream& out) {
  corpus::Cohort cohort = o.format == "auto"
                              ? corpus::ingest_corpus(o.corpus)
                              : corpus::ingest_corpus(o.corpus, o.format == "csv" ? corpus::CorpusFormat::csv
                                                                                  : corpus::CorpusFormat::jsonl);
  write_file_atomic(o.out, corpus::serialize_jsonl(cohort));
  out << ojson{{"records", cohort.size()}, {"content_hash", cohort.content_hash()}, {"out", o.out}}.dump(2) << "\n";
  return kExitOk;
}

int cmd_exclude(const Options& o, std::ostream& out) {
  const corpus::Cohort cohort = read_cohort(o.cohort);
  auto [kept, report] = corpus::apply_exclusions(cohort);
  write_file_atomic(o.out, corpus::serialize_jsonl(kept));
  const ojson j = corpus::to_json(report);
  if (!o.report.empty()) write_json(o.report, j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_split(const AppConfig& config, const Options& o, std::ostream& out) {
  const corpus::Cohort cohort = read_cohort(o.cohort);
  const corpus::Fraction fraction = o.fraction.empty() ? config.split.fraction : corpus::Fraction::parse(o.fraction);
  const std::uint64_t seed = o.seed.value_or(config.split.seed);
  const corpus::SplitAssignment split = corpus::stratified_split(cohort, fraction, seed);
  write_json(o.out, corpus::to_json(split));
  if (!o.demographics.empty()) write_json(o.demographics, corpus::to_json(corpus::summarize_demographics(cohort, split)));
  out << ojson{{"exploration", split.exploration_ids.size()},
               {"test", split.test_ids.size()},
               {"fraction", fraction.str()},
               {"seed", seed}}
             .dump(2)
      << "\n";
  return kExitOk;
}

int cmd_synth(const AppConfig& config, const Options& o, std::ostream& out) {
  synth::SynthConfig sc = config.synth;
  if (o.n) sc.n = *o.n;
  if (o.seed) sc.seed = *o.seed;
  if (o.noise) sc.noise_level = *o.noise;
  if (o.length) sc.note_length_target = *o.length;
  const synth::SyntheticCorpus corpus = synth::generate_corpus(sc);
  write_file_atomic(o.out, corpus::serialize_jsonl(corpus.cohort));
  if (!o.profiles.empty()) write_file_atomic(o.profiles, synth::profiles_jsonl(corpus.profiles));
  out << ojson{{"records", corpus.cohort.size()},
               {"seed", sc.seed},
               {"noise_level", sc.noise_level},
               {"content_hash", corpus.cohort.content_hash()}}
             .dump(2)
      << "\n";
  return kExitOk;
}

std::shared_ptr<backends::ChatClient> make_client(const AppConfig& config, const std::string& name, bool cache) {
  std::shared_ptr<backends::ResponseCache> store;
  if (cache) store = std::make_shared<backends::ResponseCache>(config.paths.cache_dir);
  return std::make_shared<backends::ChatClient>(config.backend(name), store);
}

int cmd_run(const AppConfig& config, const Options& o, std::ostream& out) {
  const pipeline::Engine engine = pipeline::parse_engine(o.engine);
  const corpus::Cohort full = read_cohort(o.cohort);
  std::optional<corpus::SplitAssignment> split;
  if (!o.split.empty()) split = read_split(o.split);

  corpus::Cohort target = full;
  if (o.subset == "exploration" || o.subset == "test") {
    if (!split) throw ConfigError("--subset " + o.subset + " needs --split");
    target = corpus::subset(full, o.subset == "test" ? split->test_ids : split->exploration_ids);
  } else if (o.subset != "all") {
    throw ConfigError("--subset must be exploration, test or all");
  }

  const fs::path dir = o.run_dir;
  std::error_code ec;
  if (fs::exists(dir / pipeline::kManifestFile, ec)) {
    const auto previous = pipeline::load_manifest(dir);
    if (previous.cohort_hash != target.content_hash() || previous.engine != engine) {
      throw ConfigError("run directory " + dir.string() + " holds a different run",
                        {"engine " + std::string(pipeline::to_string(previous.engine)) + ", cohort " +
                         previous.cohort_hash});
    }
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / kCohortSnapshot, corpus::serialize_jsonl(target));

  std::unique_ptr<pipeline::Predictor> predictor;
  const std::string reasoning_name = o.backend.empty() ? config.run.reasoning_backend : o.backend;
  std::string extraction_name = !o.extraction_backend.empty() ? o.extraction_backend
                                : !o.backend.empty()          ? o.backend
                                : !config.run.extraction_backend.empty() ? config.run.extraction_backend
                                                                         : reasoning_name;
  switch (engine) {
    case pipeline::Engine::cope: {
      auto reasoning = make_client(config, reasoning_name, !o.no_cache);
      auto extraction = extraction_name == reasoning_name ? reasoning : make_client(config, extraction_name, !o.no_cache);
      predictor = std::make_unique<pipeline::CopePredictor>(
          reasoning, extraction, template_or_builtin(config.templates.reasoning, "reasoning"),
          template_or_builtin(config.templates.extraction, "extraction"));
      break;
    }
    case pipeline::Engine::single_step:
      predictor = std::make_unique<pipeline::SingleStepPredictor>(
          make_client(config, reasoning_name, !o.no_cache),
          template_or_builtin(config.templates.single_step, "single_step"));
      break;
    case pipeline::Engine::clinical_ml: {
      if (!split) throw ConfigError("--engine clinical_ml needs --split (it trains on the exploration subset)");
      if (o.subset != "test") spdlog::warn("clinical_ml is scored on records it may have been trained on");
      const auto model = pipeline::train_clinical_ml(corpus::subset(full, split->exploration_ids), config.svr);
      write_json(dir / kModelFile, model.to_json());
      predictor = std::make_unique<pipeline::ClinicalMlPredictor>(model);
      break;
    }
  }

  pipeline::RunOptions options;
  options.run_dir = dir;
  options.concurrency = o.concurrency.value_or(config.run.concurrency);
  options.limit = o.limit;
  options.subset = o.subset;
  if (split) options.split_seed = split->seed;
  const pipeline::RunManifest manifest = pipeline::run_cohort(target, *predictor, options);
  out << pipeline::to_json(manifest).dump(2) << "\n";
  return manifest.complete && manifest.counts.backend_failed == 0 ? kExitOk : kExitPartial;
}

int cmd_eval(const AppConfig& config, const Options& o, std::ostream& out) {
  const RunData run = load_run(o.run_dir);
  std::size_t excluded = 0;
  const stats::PairedOutcomes outcomes = outcomes_of(run, excluded);
  const auto report =
      stats::metric_report(std::string(pipeline::to_string(run.manifest.engine)), outcomes, excluded, config.stats.bootstrap);
  const ojson j = stats::to_json(report);
  write_json(run.dir / kMetricsFile, j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_compare(const AppConfig& config, const Options& o, std::ostream& out) {
  std::vector<RunData> runs;
  runs.push_back(load_run(o.a));
  for (const auto& b : o.b) runs.push_back(load_run(b));

  std::vector<stats::Metric> family;
  for (const auto& name : split_list(o.family)) {
    try {
      family.push_back(stats::parse_metric(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (family.empty()) throw ConfigError("--family is empty");

  // Patients scored ok by every arm, with one shared ground truth.
  std::map<std::string, int> truth;
  for (const auto& r : runs[0].cohort.records()) {
    if (r.mrs_90d) truth[r.id] = *r.mrs_90d;
  }
  std::vector<std::map<std::string, int>> preds(runs.size());
  for (std::size_t k = 0; k < runs.size(); ++k) {
    for (const auto& p : runs[k].predictions) {
      if (p.status == pipeline::PredictionStatus::ok) preds[k][p.patient_id] = *p.predicted_mrs;
    }
    for (const auto& r : runs[k].cohort.records()) {
      const auto it = truth.find(r.id);
      if (it != truth.end() && r.mrs_90d && *r.mrs_90d != it->second) {
        throw DataError("runs disagree on the label of " + r.id);
      }
    }
  }
  std::vector<std::string> ids;
  std::size_t dropped = 0;
  for (const auto& [id, y] : truth) {
    bool all = true;
    for (const auto& m : preds) all = all && m.count(id);
    if (all) {
      ids.push_back(id);
    } else {
      ++dropped;
    }
  }
  if (ids.empty()) throw DataError("no patient was scored by every compared run");
  auto arm = [&](std::size_t k) {
    std::vector<int> t, p;
    for (const auto& id : ids) {
      t.push_back(truth[id]);
      p.push_back(preds[k].at(id));
    }
    return stats::PairedOutcomes(ids, t, p);
  };
  auto name_of = [&](std::size_t k) {
    return std::string(pipeline::to_string(runs[k].manifest.engine)) + ":" + runs[k].dir.filename().string();
  };
  std::vector<std::pair<std::string, stats::PairedOutcomes>> others;
  for (std::size_t k = 1; k < runs.size(); ++k) others.emplace_back(name_of(k), arm(k));
  const auto results = stats::compare_models(name_of(0), arm(0), others, family, config.stats.bootstrap, config.stats.q);

  ojson j;
  j["n"] = ids.size();
  j["dropped"] = dropped;
  j["q"] = config.stats.q;
  j["bootstrap"] = ojson{{"resamples", config.stats.bootstrap.resamples}, {"seed", config.stats.bootstrap.seed}};
  ojson list = ojson::array();
  for (const auto& r : results) list.push_back(stats::to_json(r));
  j["comparisons"] = list;
  if (!o.out.empty()) write_json(o.out, j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_subgroup(const AppConfig& config, const Options& o, std::ostream& out) {
  const RunData run = load_run(o.run_dir);
  std::vector<stats::Axis> axes = config.subgroup_axes;
  if (!o.axes.empty()) {
    axes.clear();
    for (const auto& name : split_list(o.axes)) {
      try {
        axes.push_back(stats::parse_axis(name));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  std::size_t excluded = 0;
  const stats::PairedOutcomes outcomes = outcomes_of(run, excluded);
  stats::SubgroupReport report = stats::subgroup_report(outcomes, run.cohort, axes, config.stats.bootstrap);
  report.excluded = excluded;
  write_json(run.dir / kForestJson, stats::to_json(report));
  const std::string csv = stats::forest_csv(report);
  write_file_atomic(run.dir / kForestCsv, csv);
  out << csv;
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  const fs::path dir = o.run_dir;
  std::set<std::string> formats;
  for (const auto& f : split_list(o.formats)) {
    if (f != "csv" && f != "json" && f != "svg") throw ConfigError("unknown report format \"" + f + "\"");
    formats.insert(f);
  }
  const stats::MetricReport metrics = stats::metric_report_from_json(read_json(dir / kMetricsFile));
  std::optional<stats::SubgroupReport> forest;
  std::error_code ec;
  if (fs::exists(dir / kForestJson, ec)) forest = stats::subgroup_report_from_json(read_json(dir / kForestJson));

  const fs::path out_dir = o.out.empty() ? dir / "report" : fs::path(o.out);
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::string> written;
  // CSV and JSON are always produced; svg only on request.
  write_file_atomic(out_dir / "metrics.csv", metrics_csv({metrics}));
  written.push_back((out_dir / "metrics.csv").string());
  if (forest) {
    write_file_atomic(out_dir / "forest.csv", stats::forest_csv(*forest));
    written.push_back((out_dir / "forest.csv").string());
  }
  write_json(out_dir / "report.json", report_json({metrics}, forest));
  written.push_back((out_dir / "report.json").string());
  if (formats.count("svg")) {
    if (!forest) throw DataError("svg report needs subgroup results; run `cope subgroup` first");
    write_file_atomic(out_dir / "forest.svg", forest_svg(*forest, "MAE by subgroup: " + metrics.model));
    written.push_back((out_dir / "forest.svg").string());
  }
  out << ojson{{"written", written}}.dump(2) << "\n";
  return kExitOk;
}

void setup_logging(const std::string& level) {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("cope");
    spdlog::set_default_logger(logger);
  });
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

RunData load_run(const fs::path& dir) {
  RunData run;
  run.dir = dir;
  run.manifest = pipeline::load_manifest(dir);
  run.predictions = pipeline::load_predictions(dir);
  const fs::path snapshot = dir / kCohortSnapshot;
  std::error_code ec;
  if (!fs::exists(snapshot, ec)) throw DataError("run directory lacks " + snapshot.string());
  run.cohort = corpus::ingest_corpus(snapshot, corpus::CorpusFormat::jsonl);
  if (run.cohort.content_hash() != run.manifest.cohort_hash) {
    throw DataError("cohort snapshot in " + dir.string() + " does not match its manifest");
  }
  return run;
}

stats::PairedOutcomes outcomes_of(const RunData& run, std::size_t& excluded) {
  std::map<std::string, int> predicted;
  for (const auto& p : run.predictions) {
    if (p.status == pipeline::PredictionStatus::ok) predicted[p.patient_id] = *p.predicted_mrs;
  }
  std::vector<std::pair<std::string, int>> rows;
  std::map<std::string, int> truth;
  for (const auto& r : run.cohort.records()) {
    if (r.mrs_90d && predicted.count(r.id)) truth[r.id] = *r.mrs_90d;
  }
  excluded = run.cohort.size() - truth.size();
  if (truth.empty()) throw DataError("run " + run.dir.string() + " has no scored, labeled patients");
  std::vector<std::string> ids;
  std::vector<int> t, p;
  for (const auto& [id, y] : truth) {
    ids.push_back(id);
    t.push_back(y);
    p.push_back(predicted[id]);
  }
  return stats::PairedOutcomes(std::move(ids), std::move(t), std::move(p));
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Two-step chain-of-thought mRS prediction workbench"};
  app.require_subcommand(1);
  app.add_option("-c,--config", o.config_path, "TOML config file");
  app.add_option("--set", o.overrides, "Config override section.key=value (repeatable)");
  app.add_option("--log-level", o.log_level, "trace|debug|info|warn|error|off");

  auto* ingest = app.add_subcommand("ingest", "Validate a JSONL/CSV corpus and write canonical JSONL");
  ingest->add_option("--corpus", o.corpus, "Input corpus")->required();
  ingest->add_option("--format", o.format, "auto|jsonl|csv")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
  ingest->add_option("--out", o.out, "Output JSONL")->required();

  auto* exclude = app.add_subcommand("exclude", "Drop unlabeled records and in-hospital deaths");
  exclude->add_option("--cohort", o.cohort)->required();
  exclude->add_option("--out", o.out)->required();
  exclude->add_option("--report", o.report, "Write the exclusion counts here");

  auto* split = app.add_subcommand("split", "Stratified exploration/test split");
  split->add_option("--cohort", o.cohort)->required();
  split->add_option("--out", o.out)->required();
  split->add_option("--fraction", o.fraction, "Exploration share, e.g. 0.2 or 1/5");
  split->add_option("--seed", o.seed);
  split->add_option("--demographics", o.demographics, "Write a per-arm demographics table here");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  synth->add_option("--out", o.out)->required();
  synth->add_option("--profiles", o.profiles, "Write the latent profiles here");
  synth->add_option("--n", o.n);
  synth->add_option("--seed", o.seed);
  synth->add_option("--noise", o.noise)->check(CLI::Range(0, 2));
  synth->add_option("--length", o.length, "Target note length in words");

  auto* run = app.add_subcommand("run", "Score a cohort with one engine");
  run->add_option("--engine", o.engine)->required()->check(CLI::IsMember({"cope", "single_step", "clinical_ml"}));
  run->add_option("--backend", o.backend, "Backend name from the config");
  run->add_option("--extraction-backend", o.extraction_backend, "Separate backend for the extraction step");
  run->add_option("--subset", o.subset, "exploration|test|all")->check(CLI::IsMember({"exploration", "test", "all"}));
  run->add_option("--cohort", o.cohort)->required();
  run->add_option("--split", o.split, "Split file from `cope split`");
  run->add_option("--run", o.run_dir, "Run directory")->required();
  run->add_option("--limit", o.limit, "Stop after this many new predictions");
  run->add_option("--concurrency", o.concurrency);
  run->add_flag("--no-cache", o.no_cache, "Bypass the response cache");

  auto* eval = app.add_subcommand("eval", "MAE, ACC and within-1 ACC with bootstrap intervals");
  eval->add_option("--run", o.run_dir)->required();

  auto* compare = app.add_subcommand("compare", "Paired bootstrap tests with Benjamini-Hochberg control");
  compare->add_option("--a", o.a)->required();
  compare->add_option("--b", o.b)->required();
  compare->add_option("--family", o.family, "Metrics, e.g. mae,acc,within1_acc");
  compare->add_option("--out", o.out);

  auto* subgroup = app.add_subcommand("subgroup", "Per-band MAE with bootstrap intervals");
  subgroup->add_option("--run", o.run_dir)->required();
  subgroup->add_option("--axes", o.axes, "e.g. age,evt,length,sex");

  auto* report = app.add_subcommand("report", "Render persisted metrics and subgroup results");
  report->add_option("--run", o.run_dir)->required();
  report->add_option("--format", o.formats, "csv,json,svg");
  report->add_option("--out", o.out, "Output directory (default <run>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    print_error(err, "config", e.what());
    return kExitConfig;
  }

  try {
    setup_logging(o.log_level);
    const AppConfig config = load_config(o.config_path, o.overrides);
    if (ingest->parsed()) return cmd_ingest(o, out);
    if (exclude->parsed()) return cmd_exclude(o, out);
    if (split->parsed()) return cmd_split(config, o, out);
    if (synth->parsed()) return cmd_synth(config, o, out);
    if (run->parsed()) return cmd_run(config, o, out);
    if (eval->parsed()) return cmd_eval(config, o, out);
    if (compare->parsed()) return cmd_compare(config, o, out);
    if (subgroup->parsed()) return cmd_subgroup(config, o, out);
    if (report->parsed()) return cmd_report(o, out);
  } catch (const Error& e) {
    print_error(err, kind_name(e.kind()), e.what(), e.details());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    print_error(err, "data", e.what());
    return kExitData;
  }
  return kExitConfig;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("cope");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cope::cli
