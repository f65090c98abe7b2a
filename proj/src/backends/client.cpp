#include "cope/backends/client.hpp"

#include <cstdlib>
#include <thread>

#include <spdlog/spdlog.h>

#include "cope/backends/mock.hpp"

namespace cope::backends {

std::chrono::milliseconds backoff_delay(int retry) {
  long long ms = 500;
  for (int k = 1; k < retry && ms < 30000; ++k) ms *= 2;
  return std::chrono::milliseconds(std::min(ms, 30000LL));
}

ChatClient::ChatClient(BackendConfig config, std::shared_ptr<ResponseCache> cache,
                       std::shared_ptr<Transport> transport)
    : config_(std::move(config)), cache_(std::move(cache)), transport_(std::move(transport)) {
  config_.validate();
  if (!transport_ && config_.kind == BackendKind::http_chat) transport_ = std::make_shared<HttpTransport>();
  sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

namespace {
bool retryable(int status) { return status == 429 || status >= 500; }

std::string excerpt(const std::string& body) {
  return body.size() > 500 ? body.substr(0, 500) + "..." : body;
}
}  // namespace

std::string ChatClient::call_http(const ChatRequest& request, int& attempt) {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  const json body = {{"model", config_.model_name},
                     {"messages", messages},
                     {"temperature", request.params.temperature},
                     {"max_tokens", request.params.max_tokens}};
  const std::string url = completions_url(config_.base_url);

  const int max_attempts = config_.max_retries + 1;
  std::string last_error;
  int last_status = 0;
  for (attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) sleep_(backoff_delay(attempt - 1));
    Headers headers;
    // Read per call so a rotated token takes effect without a restart.
    if (config_.auth_token_env) {
      if (const char* token = std::getenv(config_.auth_token_env->c_str()); token && *token) {
        headers.emplace_back("Authorization", std::string("Bearer ") + token);
      }
    }
    HttpResponse res;
    try {
      res = transport_->post_json(url, headers, body.dump(), config_.request_timeout);
    } catch (const TransportError& e) {
      last_error = e.what();
      last_status = 0;
      spdlog::warn("backend {}: attempt {}/{} failed: {}", config_.name, attempt, max_attempts, last_error);
      continue;
    }
    if (res.status >= 200 && res.status < 300) {
      json envelope;
      try {
        envelope = json::parse(res.body);
        const auto& content = envelope.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw std::runtime_error("content is not a string");
        return content.get<std::string>();
      } catch (const std::exception& e) {
        throw BackendError("malformed response envelope from " + url + ": " + e.what() + "; body: " +
                               excerpt(res.body),
                           res.status, attempt);
      }
    }
    if (!retryable(res.status)) {
      throw BackendError("backend returned HTTP " + std::to_string(res.status) + ": " + excerpt(res.body),
                         res.status, attempt);
    }
    last_status = res.status;
    last_error = "HTTP " + std::to_string(res.status) + ": " + excerpt(res.body);
    spdlog::warn("backend {}: attempt {}/{} failed: {}", config_.name, attempt, max_attempts, last_error);
  }
  throw BackendError("backend " + config_.name + " failed after " + std::to_string(max_attempts) +
                         " attempts: " + last_error,
                     last_status, max_attempts);
}

ChatResponse ChatClient::complete(const ChatRequest& request) {
  request.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::string key = cache_key(config_.kind, config_.model_name, request);
  ChatResponse response;
  if (cache_) {
    if (auto hit = cache_->lookup(key)) {
      response.content = std::move(*hit);
      response.from_cache = true;
      response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
      return response;
    }
  }
  ++backend_calls_;
  int attempt = 1;
  if (config_.kind == BackendKind::mock) {
    response.content = mock_complete(request, config_.mock_noise_level, config_.mock_seed);
  } else {
    response.content = call_http(request, attempt);
  }
  response.attempt = attempt;
  response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  if (cache_) {
    ojson meta;
    meta["kind"] = to_string(config_.kind);
    meta["model"] = config_.model_name;
    meta["temperature"] = request.params.temperature;
    meta["max_tokens"] = request.params.max_tokens;
    ojson messages = ojson::array();
    for (const auto& m : request.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    meta["messages"] = messages;
    cache_->store(key, response.content, meta);
  }
  return response;
}

ChatResponse complete_chat(const BackendConfig& config, const ChatRequest& request,
                           std::shared_ptr<ResponseCache> cache) {
  ChatClient client(config, std::move(cache));
  return client.complete(request);
}

}  // namespace cope::backends
