#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cope/util/error.hpp"
#include "cope/util/json.hpp"

namespace cope::backends {

enum class BackendKind { http_chat, mock };
std::string_view to_string(BackendKind kind);
/// Throws ConfigError.
BackendKind parse_backend_kind(std::string_view text);

enum class Role { system, user, assistant };
std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

struct SamplingParams {
  double temperature = 0.0;
  int max_tokens = 1024;
  bool operator==(const SamplingParams&) const = default;
};

inline constexpr int kReasoningMaxTokens = 1024;
inline constexpr int kExtractionMaxTokens = 8;

struct ChatRequest {
  std::vector<ChatMessage> messages;
  SamplingParams params;

  /// Throws std::invalid_argument unless there is at least one message and
  /// the last one is from the user.
  void validate() const;
  /// All message contents joined by blank lines.
  std::string joined_content() const;
};

struct ChatResponse {
  std::string content;
  std::chrono::milliseconds latency{0};
  int attempt = 1;
  bool from_cache = false;
};

inline constexpr std::string_view kDefaultTokenEnv = "COPE_API_TOKEN";

struct BackendConfig {
  std::string name = "default";
  BackendKind kind = BackendKind::mock;
  std::string base_url;
  std::string model_name = "mock";
  double temperature = 0.0;
  int max_tokens = kReasoningMaxTokens;
  std::chrono::milliseconds request_timeout{120000};
  int max_retries = 3;
  std::optional<std::string> auth_token_env = std::string(kDefaultTokenEnv);
  int max_in_flight = 4;
  int mock_noise_level = 0;
  std::uint64_t mock_seed = 0;

  /// Throws ConfigError listing every problem.
  void validate() const;
};

/// Snapshot safe to persist: names the token variable, never its value.
ojson to_json(const BackendConfig& config);
BackendConfig backend_config_from_json(const json& j);

/// Backend failure after retries, a non-success status, or a bad envelope.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, int http_status = 0, int attempts = 1)
      : Error(ErrorKind::backend, what), http_status_(http_status), attempts_(attempts) {}
  int http_status() const noexcept { return http_status_; }
  int attempts() const noexcept { return attempts_; }

 private:
  int http_status_;
  int attempts_;
};

/// SHA-256 over the canonical JSON of kind, model, messages, temperature and
/// max_tokens.
std::string cache_key(BackendKind kind, std::string_view model_name, const ChatRequest& request);

}  // namespace cope::backends
