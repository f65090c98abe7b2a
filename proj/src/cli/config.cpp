#include "cope/cli/config.hpp"

#include <set>
#include <sstream>

#include <toml.hpp>

#include "cope/util/error.hpp"
#include "cope/util/io.hpp"

namespace fs = std::filesystem;

namespace cope::cli {

const backends::BackendConfig& AppConfig::backend(const std::string& name) const {
  const auto it = backends.find(name);
  if (it == backends.end()) {
    std::vector<std::string> known;
    for (const auto& [k, v] : backends) known.push_back("configured backend: " + k);
    throw ConfigError("unknown backend \"" + name + "\"", known);
  }
  return it->second;
}

AppConfig default_config() {
  AppConfig c;
  backends::BackendConfig mock;
  mock.name = "mock";
  mock.kind = backends::BackendKind::mock;
  mock.model_name = "mock";
  c.backends["mock"] = mock;
  return c;
}

namespace {

// Collects every problem so one error lists them all.
class Reader {
 public:
  std::vector<std::string> problems;

  void check_keys(const toml::table& t, const std::string& section, const std::set<std::string>& known) {
    for (const auto& [k, v] : t) {
      if (!known.count(std::string(k.str()))) problems.push_back(section + ": unknown key \"" + std::string(k.str()) + "\"");
    }
  }

  const toml::table* section(const toml::table& root, const std::string& name) {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) {
      problems.push_back(name + ": expected a table");
      return nullptr;
    }
    return n->as_table();
  }

  std::optional<std::int64_t> integer(const toml::table& t, const std::string& where, const std::string& key,
                                      std::int64_t lo, std::int64_t hi) {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    if (!n->is_integer()) {
      problems.push_back(where + "." + key + ": expected an integer");
      return std::nullopt;
    }
    const std::int64_t v = n->as_integer()->get();
    if (v < lo || v > hi) {
      problems.push_back(where + "." + key + ": " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
      return std::nullopt;
    }
    return v;
  }

  std::optional<double> number(const toml::table& t, const std::string& where, const std::string& key) {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    if (n->is_integer()) return static_cast<double>(n->as_integer()->get());
    if (n->is_floating_point()) return n->as_floating_point()->get();
    problems.push_back(where + "." + key + ": expected a number");
    return std::nullopt;
  }

  std::optional<std::string> string(const toml::table& t, const std::string& where, const std::string& key) {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    if (!n->is_string()) {
      problems.push_back(where + "." + key + ": expected a string");
      return std::nullopt;
    }
    return n->as_string()->get();
  }

  template <typename Fn>
  void guard(const std::string& where, Fn fn) {
    try {
      fn();
    } catch (const Error& e) {
      problems.push_back(where + ": " + e.what());
      for (const auto& d : e.details()) problems.push_back(where + ": " + d);
    } catch (const std::exception& e) {
      problems.push_back(where + ": " + e.what());
    }
  }
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

toml::table* ensure_table(toml::table& root, const std::string& dotted, std::string& leaf) {
  toml::table* t = &root;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = dotted.find('.', pos);
    if (dot == std::string::npos) {
      leaf = dotted.substr(pos);
      return t;
    }
    const std::string part = dotted.substr(pos, dot - pos);
    toml::node* n = t->get(part);
    if (!n) {
      t->insert(part, toml::table{});
      n = t->get(part);
    }
    if (!n->is_table()) return nullptr;
    t = n->as_table();
    pos = dot + 1;
  }
}

void apply_override(toml::table& root, const std::string& item, std::vector<std::string>& problems) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) {
    problems.push_back("override \"" + item + "\": expected section.key=value");
    return;
  }
  const std::string key = item.substr(0, eq);
  const std::string value = item.substr(eq + 1);
  std::string leaf;
  toml::table* t = ensure_table(root, key, leaf);
  if (!t || leaf.empty()) {
    problems.push_back("override \"" + item + "\": cannot address " + key);
    return;
  }
  try {
    toml::table parsed = toml::parse("v = " + value);
    t->insert_or_assign(leaf, *parsed.get("v"));
  } catch (const toml::parse_error&) {
    t->insert_or_assign(leaf, value);
  }
}

backends::BackendConfig read_backend(Reader& r, const std::string& name, const toml::table& t) {
  const std::string where = "backends." + name;
  r.check_keys(t, where,
               {"kind", "base_url", "model_name", "temperature", "max_tokens", "timeout_s", "max_retries",
                "auth_token_env", "max_in_flight", "noise_level", "seed"});
  backends::BackendConfig b;
  b.name = name;
  if (auto v = r.string(t, where, "kind")) r.guard(where, [&] { b.kind = backends::parse_backend_kind(*v); });
  if (auto v = r.string(t, where, "base_url")) b.base_url = *v;
  b.model_name = b.kind == backends::BackendKind::mock ? "mock" : "";
  if (auto v = r.string(t, where, "model_name")) b.model_name = *v;
  if (auto v = r.number(t, where, "temperature")) b.temperature = *v;
  if (auto v = r.integer(t, where, "max_tokens", 1, 1 << 20)) b.max_tokens = static_cast<int>(*v);
  if (auto v = r.number(t, where, "timeout_s")) {
    if (*v <= 0) {
      r.problems.push_back(where + ".timeout_s: must be positive");
    } else {
      b.request_timeout = std::chrono::milliseconds(static_cast<long long>(*v * 1000.0));
    }
  }
  if (auto v = r.integer(t, where, "max_retries", 0, 100)) b.max_retries = static_cast<int>(*v);
  if (auto v = r.string(t, where, "auth_token_env")) {
    if (v->empty()) {
      b.auth_token_env.reset();
    } else {
      b.auth_token_env = *v;
    }
  }
  if (auto v = r.integer(t, where, "max_in_flight", 1, 1024)) b.max_in_flight = static_cast<int>(*v);
  if (auto v = r.integer(t, where, "noise_level", 0, 6)) b.mock_noise_level = static_cast<int>(*v);
  if (auto v = r.integer(t, where, "seed", 0, INT64_MAX)) b.mock_seed = static_cast<std::uint64_t>(*v);
  r.guard(where, [&] { b.validate(); });
  return b;
}

}  // namespace

AppConfig parse_config(const std::string& toml_text, const std::vector<std::string>& overrides,
                       const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.source().begin;
    throw ConfigError("config is not valid TOML", {std::string(e.description()) + " at " + os.str()});
  }
  Reader r;
  for (const auto& o : overrides) apply_override(root, o, r.problems);

  AppConfig c = default_config();
  r.check_keys(root, "config",
               {"paths", "templates", "run", "split", "stats", "subgroup", "synth", "clinical_ml", "backends"});

  if (const auto* t = r.section(root, "paths")) {
    r.check_keys(*t, "paths", {"cache_dir"});
    if (auto v = r.string(*t, "paths", "cache_dir")) c.paths.cache_dir = resolve(base_dir, *v);
  }
  if (const auto* t = r.section(root, "templates")) {
    r.check_keys(*t, "templates", {"reasoning", "extraction", "single_step"});
    for (auto [key, target] : {std::pair{"reasoning", &c.templates.reasoning},
                               std::pair{"extraction", &c.templates.extraction},
                               std::pair{"single_step", &c.templates.single_step}}) {
      if (auto v = r.string(*t, "templates", key); v && !v->empty()) {
        *target = resolve(base_dir, *v);
        std::error_code ec;
        if (!fs::is_regular_file(*target, ec)) {
          r.problems.push_back(std::string("templates.") + key + ": no such file " + target->string());
        }
      }
    }
  }
  if (const auto* t = r.section(root, "run")) {
    r.check_keys(*t, "run", {"concurrency", "reasoning_backend", "extraction_backend"});
    if (auto v = r.integer(*t, "run", "concurrency", 1, 1024)) c.run.concurrency = static_cast<unsigned>(*v);
    if (auto v = r.string(*t, "run", "reasoning_backend")) c.run.reasoning_backend = *v;
    if (auto v = r.string(*t, "run", "extraction_backend")) c.run.extraction_backend = *v;
  }
  if (const auto* t = r.section(root, "split")) {
    r.check_keys(*t, "split", {"fraction", "seed"});
    if (const toml::node* n = t->get("fraction")) {
      r.guard("split.fraction", [&] {
        if (n->is_string()) {
          c.split.fraction = corpus::Fraction::parse(n->as_string()->get());
        } else if (n->is_floating_point() || n->is_integer()) {
          std::ostringstream os;
          os << (n->is_integer() ? static_cast<double>(n->as_integer()->get()) : n->as_floating_point()->get());
          c.split.fraction = corpus::Fraction::parse(os.str());
        } else {
          throw ConfigError("expected a number or a \"p/q\" string");
        }
      });
    }
    if (auto v = r.integer(*t, "split", "seed", 0, INT64_MAX)) c.split.seed = static_cast<std::uint64_t>(*v);
  }
  if (const auto* t = r.section(root, "stats")) {
    r.check_keys(*t, "stats", {"resamples", "seed", "q", "threads"});
    if (auto v = r.integer(*t, "stats", "resamples", 100, 10000000)) c.stats.bootstrap.resamples = static_cast<int>(*v);
    if (auto v = r.integer(*t, "stats", "seed", 0, INT64_MAX)) c.stats.bootstrap.seed = static_cast<std::uint64_t>(*v);
    if (auto v = r.integer(*t, "stats", "threads", 0, 1024)) c.stats.bootstrap.threads = static_cast<unsigned>(*v);
    if (auto v = r.number(*t, "stats", "q")) {
      if (*v <= 0 || *v >= 1) {
        r.problems.push_back("stats.q: must lie in (0, 1)");
      } else {
        c.stats.q = *v;
      }
    }
  }
  if (const auto* t = r.section(root, "subgroup")) {
    r.check_keys(*t, "subgroup", {"axes"});
    if (const toml::node* n = t->get("axes")) {
      std::vector<stats::Axis> axes;
      auto add = [&](std::string_view name) {
        r.guard("subgroup.axes", [&] { axes.push_back(stats::parse_axis(name)); });
      };
      if (n->is_array()) {
        for (const auto& item : *n->as_array()) {
          if (item.is_string()) {
            add(item.as_string()->get());
          } else {
            r.problems.push_back("subgroup.axes: expected strings");
          }
        }
      } else if (n->is_string()) {
        std::stringstream ss(n->as_string()->get());
        for (std::string item; std::getline(ss, item, ',');) add(item);
      } else {
        r.problems.push_back("subgroup.axes: expected a list of axis names");
      }
      c.subgroup_axes = axes;
    }
  }
  if (const auto* t = r.section(root, "synth")) {
    r.check_keys(*t, "synth", {"n", "seed", "noise_level", "note_length"});
    if (auto v = r.integer(*t, "synth", "n", 1, 10000000)) c.synth.n = static_cast<std::size_t>(*v);
    if (auto v = r.integer(*t, "synth", "seed", 0, INT64_MAX)) c.synth.seed = static_cast<std::uint64_t>(*v);
    if (auto v = r.integer(*t, "synth", "noise_level", 0, 2)) c.synth.noise_level = static_cast<int>(*v);
    if (auto v = r.integer(*t, "synth", "note_length", 1, 1000000)) {
      c.synth.note_length_target = static_cast<std::size_t>(*v);
    }
  }
  if (const auto* t = r.section(root, "clinical_ml")) {
    r.check_keys(*t, "clinical_ml", {"c", "epsilon", "epochs", "learning_rate", "seed"});
    if (auto v = r.number(*t, "clinical_ml", "c")) c.svr.c = *v;
    if (auto v = r.number(*t, "clinical_ml", "epsilon")) c.svr.epsilon = *v;
    if (auto v = r.integer(*t, "clinical_ml", "epochs", 1, 1000000)) c.svr.epochs = static_cast<int>(*v);
    if (auto v = r.number(*t, "clinical_ml", "learning_rate")) c.svr.learning_rate = *v;
    if (auto v = r.integer(*t, "clinical_ml", "seed", 0, INT64_MAX)) c.svr.seed = static_cast<std::uint64_t>(*v);
    if (!(c.svr.c > 0)) r.problems.push_back("clinical_ml.c: must be positive");
    if (!(c.svr.epsilon >= 0)) r.problems.push_back("clinical_ml.epsilon: must be >= 0");
    if (!(c.svr.learning_rate > 0)) r.problems.push_back("clinical_ml.learning_rate: must be positive");
  }
  if (const auto* t = r.section(root, "backends")) {
    for (const auto& [k, v] : *t) {
      const std::string name(k.str());
      if (!v.is_table()) {
        r.problems.push_back("backends." + name + ": expected a table");
        continue;
      }
      c.backends[name] = read_backend(r, name, *v.as_table());
    }
  }
  for (const auto& name : {c.run.reasoning_backend, c.run.extraction_backend}) {
    if (!name.empty() && !c.backends.count(name)) r.problems.push_back("run: backend \"" + name + "\" is not configured");
  }
  if (!r.problems.empty()) throw ConfigError("invalid configuration", r.problems);
  return c;
}

AppConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  if (path.empty()) return parse_config("", overrides, fs::current_path());
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ConfigError("config file not found: " + path.string());
  return parse_config(read_file(path), overrides, fs::absolute(path).parent_path());
}

}  // namespace cope::cli
