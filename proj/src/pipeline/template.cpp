#include "cope/pipeline/template.hpp"

#include <cctype>

#include "cope/util/assets.hpp"
#include "cope/util/error.hpp"
#include "cope/util/hash.hpp"
#include "cope/util/io.hpp"

namespace cope::pipeline {

std::string_view to_string(RoleLayout layout) {
  return layout == RoleLayout::single_user ? "single_user" : "system_and_user";
}

RoleLayout parse_role_layout(std::string_view text) {
  if (text == "single_user") return RoleLayout::single_user;
  if (text == "system_and_user") return RoleLayout::system_and_user;
  throw ConfigError("unknown role layout \"" + std::string(text) + "\"");
}

namespace {

constexpr std::string_view kUserMarker = "[user]";

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (!(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_')) {
      return false;
    }
  }
  return true;
}

struct Piece {
  bool placeholder = false;
  std::string text;
};

std::vector<Piece> tokenize(const std::string& name, std::string_view body) {
  std::vector<Piece> pieces;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto open = body.find("{{", pos);
    if (open == std::string_view::npos) {
      pieces.push_back({false, std::string(body.substr(pos))});
      break;
    }
    const auto close = body.find("}}", open + 2);
    if (close == std::string_view::npos) throw ConfigError("template \"" + name + "\": unterminated \"{{\"");
    const std::string_view inner = body.substr(open + 2, close - open - 2);
    if (!valid_name(inner)) {
      throw ConfigError("template \"" + name + "\": invalid placeholder \"{{" + std::string(inner) + "}}\"");
    }
    if (open > pos) pieces.push_back({false, std::string(body.substr(pos, open - pos))});
    pieces.push_back({true, std::string(inner)});
    pos = close + 2;
  }
  return pieces;
}

// Splits a system_and_user body; npos when there is no marker line.
std::size_t marker_line(std::string_view body) {
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto end = body.find('\n', pos);
    if (end == std::string_view::npos) end = body.size();
    std::string_view line = body.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line == kUserMarker) return pos;
    if (end == body.size()) break;
    pos = end + 1;
  }
  return std::string_view::npos;
}

std::string trim_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && (s[b] == '\n' || s[b] == '\r')) ++b;
  return s.substr(b);
}

}  // namespace

PromptTemplate PromptTemplate::from_text(std::string name, std::string body, RoleLayout layout) {
  PromptTemplate t;
  for (const auto& piece : tokenize(name, body)) {
    if (piece.placeholder) t.placeholders.insert(piece.text);
  }
  if (layout == RoleLayout::system_and_user && marker_line(body) == std::string_view::npos) {
    throw ConfigError("template \"" + name + "\": system_and_user layout needs a \"[user]\" line");
  }
  t.name = std::move(name);
  t.body = std::move(body);
  t.role_layout = layout;
  return t;
}

PromptTemplate PromptTemplate::builtin(std::string_view name) {
  std::string asset = "templates/" + std::string(name) + ".txt";
  try {
    return from_text(std::string(name), std::string(assets::find(asset)));
  } catch (const std::out_of_range&) {
    throw ConfigError("no built-in template named \"" + std::string(name) + "\"");
  }
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path, RoleLayout layout) {
  return from_text(path.stem().string(), read_file(path), layout);
}

std::string PromptTemplate::hash() const { return sha256_hex(body); }

backends::ChatRequest render_prompt(const PromptTemplate& tpl, const Bindings& bindings,
                                    const backends::SamplingParams& params) {
  std::vector<std::string> problems;
  for (const auto& p : tpl.placeholders) {
    if (bindings.find(p) == bindings.end()) problems.push_back("missing binding for {{" + p + "}}");
  }
  for (const auto& [k, v] : bindings) {
    if (!tpl.placeholders.count(k)) problems.push_back("template has no placeholder {{" + k + "}}");
  }
  if (!problems.empty()) throw ConfigError("cannot render template \"" + tpl.name + "\"", problems);

  auto expand = [&](std::string_view text) {
    std::string out;
    for (const auto& piece : tokenize(tpl.name, text)) {
      out += piece.placeholder ? bindings.find(piece.text)->second : piece.text;
    }
    return out;
  };

  backends::ChatRequest request;
  request.params = params;
  if (tpl.role_layout == RoleLayout::single_user) {
    request.messages.push_back({backends::Role::user, expand(tpl.body)});
  } else {
    const std::string_view body = tpl.body;
    const std::size_t marker = marker_line(body);
    const std::size_t after = body.find('\n', marker);
    const std::string system = trim_newlines(expand(body.substr(0, marker)));
    const std::string user =
        trim_newlines(after == std::string_view::npos ? std::string() : expand(body.substr(after + 1)));
    if (!system.empty()) request.messages.push_back({backends::Role::system, system});
    request.messages.push_back({backends::Role::user, user});
  }
  return request;
}

}  // namespace cope::pipeline
