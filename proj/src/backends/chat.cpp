#include "cope/backends/chat.hpp"

#include <cmath>
#include <stdexcept>

#include "cope/util/hash.hpp"

namespace cope::backends {

std::string_view to_string(BackendKind kind) { return kind == BackendKind::http_chat ? "http_chat" : "mock"; }

BackendKind parse_backend_kind(std::string_view text) {
  if (text == "http_chat") return BackendKind::http_chat;
  if (text == "mock") return BackendKind::mock;
  throw ConfigError("unknown backend kind \"" + std::string(text) + "\" (expected http_chat or mock)");
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view text) {
  if (text == "system") return Role::system;
  if (text == "user") return Role::user;
  if (text == "assistant") return Role::assistant;
  throw std::invalid_argument("unknown chat role \"" + std::string(text) + "\"");
}

void ChatRequest::validate() const {
  if (messages.empty()) throw std::invalid_argument("chat request has no messages");
  if (messages.back().role != Role::user) throw std::invalid_argument("last chat message must come from the user");
}

std::string ChatRequest::joined_content() const {
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out += "\n\n";
    out += m.content;
  }
  return out;
}

void BackendConfig::validate() const {
  std::vector<std::string> problems;
  if (kind == BackendKind::http_chat && base_url.empty()) problems.push_back("http_chat backend requires base_url");
  if (model_name.empty()) problems.push_back("model_name is empty");
  if (!std::isfinite(temperature) || temperature < 0) problems.push_back("temperature must be finite and >= 0");
  if (max_tokens < 1) problems.push_back("max_tokens must be >= 1");
  if (request_timeout.count() <= 0) problems.push_back("request_timeout must be positive");
  if (max_retries < 0) problems.push_back("max_retries must be >= 0");
  if (max_in_flight < 1) problems.push_back("max_in_flight must be >= 1");
  if (mock_noise_level < 0 || mock_noise_level > 6) problems.push_back("mock noise_level must be in 0..6");
  if (!problems.empty()) throw ConfigError("invalid backend \"" + name + "\"", problems);
}

ojson to_json(const BackendConfig& c) {
  ojson j;
  j["name"] = c.name;
  j["kind"] = to_string(c.kind);
  j["base_url"] = c.base_url;
  j["model_name"] = c.model_name;
  j["temperature"] = c.temperature;
  j["max_tokens"] = c.max_tokens;
  j["request_timeout_ms"] = c.request_timeout.count();
  j["max_retries"] = c.max_retries;
  j["auth_token_env"] = c.auth_token_env ? ojson(*c.auth_token_env) : ojson(nullptr);
  j["max_in_flight"] = c.max_in_flight;
  if (c.kind == BackendKind::mock) {
    j["mock_noise_level"] = c.mock_noise_level;
    j["mock_seed"] = c.mock_seed;
  }
  return j;
}

BackendConfig backend_config_from_json(const json& j) {
  BackendConfig c;
  c.name = j.value("name", c.name);
  c.kind = parse_backend_kind(j.value("kind", std::string("mock")));
  c.base_url = j.value("base_url", std::string());
  c.model_name = j.value("model_name", c.model_name);
  c.temperature = j.value("temperature", c.temperature);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.request_timeout = std::chrono::milliseconds(j.value("request_timeout_ms", c.request_timeout.count()));
  c.max_retries = j.value("max_retries", c.max_retries);
  if (j.contains("auth_token_env")) {
    c.auth_token_env = j["auth_token_env"].is_null() ? std::nullopt
                                                      : std::optional(j["auth_token_env"].get<std::string>());
  }
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.mock_noise_level = j.value("mock_noise_level", c.mock_noise_level);
  c.mock_seed = j.value("mock_seed", c.mock_seed);
  return c;
}

std::string cache_key(BackendKind kind, std::string_view model_name, const ChatRequest& request) {
  // json (std::map based) sorts keys, which makes dump() canonical.
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  const json doc = {{"kind", to_string(kind)},
                    {"model", model_name},
                    {"messages", messages},
                    {"temperature", request.params.temperature},
                    {"max_tokens", request.params.max_tokens}};
  return sha256_hex(doc.dump());
}

}  // namespace cope::backends
