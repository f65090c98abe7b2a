#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>

#include "cope/backends/cache.hpp"
#include "cope/backends/chat.hpp"
#include "cope/backends/transport.hpp"

namespace cope::backends {

using SleepFn = std::function<void(std::chrono::milliseconds)>;

/// Backoff before retry k (k >= 1): 500 ms * 2^(k-1), capped at 30 s.
std::chrono::milliseconds backoff_delay(int retry);

/// Thread-safe chat-completion client for one backend configuration.
class ChatClient {
 public:
  /// Throws ConfigError for an invalid config. Without a transport, http_chat
  /// backends use HttpTransport. A null cache disables caching.
  explicit ChatClient(BackendConfig config, std::shared_ptr<ResponseCache> cache = nullptr,
                      std::shared_ptr<Transport> transport = nullptr);

  /// Cache first, then the backend. Transport failures, 5xx and 429 are
  /// retried up to max_retries times; other statuses and malformed envelopes
  /// fail at once. Throws BackendError.
  ChatResponse complete(const ChatRequest& request);

  /// Replaces the real sleep between retries (tests).
  void set_sleep(SleepFn sleep) { sleep_ = std::move(sleep); }

  const BackendConfig& config() const { return config_; }
  /// Requests that reached the backend (cache hits excluded).
  long backend_calls() const { return backend_calls_.load(); }

 private:
  std::string call_http(const ChatRequest& request, int& attempt);

  BackendConfig config_;
  std::shared_ptr<ResponseCache> cache_;
  std::shared_ptr<Transport> transport_;
  SleepFn sleep_;
  std::atomic<long> backend_calls_{0};
};

/// One-shot convenience wrapper around ChatClient.
ChatResponse complete_chat(const BackendConfig& config, const ChatRequest& request,
                           std::shared_ptr<ResponseCache> cache = nullptr);

}  // namespace cope::backends
