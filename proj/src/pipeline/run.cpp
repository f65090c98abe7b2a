#include "cope/pipeline/run.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "cope/util/error.hpp"
#include "cope/util/hash.hpp"
#include "cope/util/io.hpp"

namespace fs = std::filesystem;

namespace cope::pipeline {

namespace {

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) {
    const fs::path path = dir / ".lock";
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw IoError("run directory " + dir.string() + " is in use by another process");
    }
  }
  ~DirLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

ojson counts_json(const StatusCounts& c) {
  return ojson{{"ok", c.ok}, {"parse_failed", c.parse_failed}, {"backend_failed", c.backend_failed}};
}

std::map<std::string, PredictionRecord> read_ledger(const fs::path& path) {
  std::map<std::string, PredictionRecord> out;
  std::error_code ec;
  if (!fs::exists(path, ec)) return out;
  const auto lines = split_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      PredictionRecord r = prediction_from_json(json::parse(lines[i]));
      out[r.patient_id] = std::move(r);
    } catch (const std::exception& e) {
      spdlog::warn("{}:{}: skipping unreadable prediction line ({})", path.string(), i + 1, e.what());
    }
  }
  return out;
}

std::string make_run_id(const RunManifest& m) {
  json basis = {{"engine", to_string(m.engine)}, {"cohort", m.cohort_hash}, {"subset", m.subset}};
  basis["backend"] = json::parse(m.backend.dump());
  basis["templates"] = m.template_hashes;
  return std::string(to_string(m.engine)) + "-" + sha256_hex(basis.dump()).substr(0, 12);
}

}  // namespace

std::string sanitize_id(std::string_view id) {
  std::string out;
  bool replaced = id.empty();
  for (char c : id) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    out += safe ? c : '_';
    replaced = replaced || !safe;
  }
  if (out == "." || out == "..") replaced = true;
  if (replaced) out += "-" + sha256_hex(id).substr(0, 8);
  return out;
}

ojson to_json(const RunManifest& m) {
  ojson j;
  j["run_id"] = m.run_id;
  j["engine"] = to_string(m.engine);
  j["complete"] = m.complete;
  j["subset"] = m.subset;
  j["cohort_hash"] = m.cohort_hash;
  j["cohort_size"] = m.cohort_size;
  j["split_seed"] = m.split_seed ? ojson(*m.split_seed) : ojson(nullptr);
  j["counts"] = counts_json(m.counts);
  j["lenient_parses"] = m.lenient_parses;
  j["new_predictions"] = m.new_predictions;
  ojson templates = ojson::object();
  for (const auto& [k, v] : m.template_hashes) templates[k] = v;
  j["template_hashes"] = templates;
  j["backend"] = m.backend;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.run_id = j.at("run_id").get<std::string>();
    m.engine = parse_engine(j.at("engine").get<std::string>());
    m.complete = j.at("complete").get<bool>();
    m.subset = j.value("subset", "");
    m.cohort_hash = j.at("cohort_hash").get<std::string>();
    m.cohort_size = j.at("cohort_size").get<std::size_t>();
    if (j.contains("split_seed") && !j["split_seed"].is_null()) m.split_seed = j["split_seed"].get<std::uint64_t>();
    const auto& c = j.at("counts");
    m.counts = {c.at("ok").get<std::size_t>(), c.at("parse_failed").get<std::size_t>(),
                c.at("backend_failed").get<std::size_t>()};
    m.lenient_parses = j.value("lenient_parses", std::size_t{0});
    m.new_predictions = j.value("new_predictions", std::size_t{0});
    m.template_hashes = j.value("template_hashes", std::map<std::string, std::string>{});
    m.backend = ojson::parse(j.value("backend", json(nullptr)).dump());
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed run manifest: ") + e.what());
  }
  return m;
}

RunManifest run_cohort(const corpus::Cohort& cohort, Predictor& predictor, const RunOptions& options) {
  const fs::path dir = options.run_dir;
  std::error_code ec;
  fs::create_directories(dir / kReasoningDir, ec);
  if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
  DirLock lock(dir);

  RunManifest manifest;
  manifest.engine = predictor.engine();
  manifest.backend = predictor.backend_snapshot();
  manifest.template_hashes = predictor.template_hashes();
  manifest.cohort_hash = cohort.content_hash();
  manifest.cohort_size = cohort.size();
  manifest.split_seed = options.split_seed;
  manifest.subset = options.subset;
  manifest.started_at = utc_timestamp();
  manifest.run_id = make_run_id(manifest);

  const fs::path ledger = dir / kPredictionsFile;
  const auto existing = read_ledger(ledger);
  // Terminate a torn final append so new lines start cleanly.
  if (fs::exists(ledger) && fs::file_size(ledger) > 0) {
    std::ifstream tail(ledger, std::ios::binary);
    tail.seekg(-1, std::ios::end);
    if (tail.get() != '\n') append_line(ledger, "");
  }

  std::vector<const corpus::PatientRecord*> todo;
  for (const auto& r : cohort.records()) {
    const auto it = existing.find(r.id);
    if (it != existing.end() && it->second.status == PredictionStatus::ok && it->second.engine == manifest.engine) {
      continue;
    }
    todo.push_back(&r);
  }
  std::sort(todo.begin(), todo.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  if (options.limit && todo.size() > *options.limit) todo.resize(*options.limit);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      if (options.cancel && options.cancel->load()) return;
      {
        std::lock_guard<std::mutex> g(error_mutex);
        if (first_error) return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      const auto& record = *todo[i];
      try {
        const PredictionRecord p = predictor.predict(record);
        if (p.reasoning) {
          write_file_atomic(dir / kReasoningDir / (sanitize_id(record.id) + ".txt"), p.reasoning->reasoning_text);
        }
        append_line(ledger, to_json(p).dump());
        ++done;
      } catch (...) {
        std::lock_guard<std::mutex> g(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, options.concurrency), std::max<std::size_t>(1, todo.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Compact: one line per cohort id, sorted. Records outside this cohort are
  // dropped from the ledger.
  auto persisted = read_ledger(ledger);
  std::set<std::string> ids;
  for (const auto& r : cohort.records()) ids.insert(r.id);
  std::string content;
  for (const auto& [id, p] : persisted) {
    if (!ids.count(id)) continue;
    content += to_json(p).dump();
    content += '\n';
    switch (p.status) {
      case PredictionStatus::ok: ++manifest.counts.ok; break;
      case PredictionStatus::parse_failed: ++manifest.counts.parse_failed; break;
      case PredictionStatus::backend_failed: ++manifest.counts.backend_failed; break;
    }
    if (p.lenient_parse) ++manifest.lenient_parses;
  }
  write_file_atomic(ledger, content);

  manifest.new_predictions = done.load();
  manifest.complete = manifest.counts.total() == cohort.size();
  manifest.finished_at = utc_timestamp();
  write_file_atomic(dir / kManifestFile, to_json(manifest).dump(2) + "\n");
  if (first_error) std::rethrow_exception(first_error);
  return manifest;
}

std::vector<PredictionRecord> load_predictions(const fs::path& run_dir) {
  const fs::path path = run_dir / kPredictionsFile;
  std::error_code ec;
  if (!fs::exists(path, ec)) throw DataError("no predictions in " + run_dir.string());
  auto ledger = read_ledger(path);
  std::vector<PredictionRecord> out;
  out.reserve(ledger.size());
  for (auto& [id, p] : ledger) out.push_back(std::move(p));
  return out;
}

RunManifest load_manifest(const fs::path& run_dir) {
  const fs::path path = run_dir / kManifestFile;
  std::error_code ec;
  if (!fs::exists(path, ec)) throw DataError("no manifest in " + run_dir.string());
  try {
    return manifest_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw DataError("unreadable manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace cope::pipeline
