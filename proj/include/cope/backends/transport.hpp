#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cope::backends {

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Connection-level failure (refused, reset, timeout).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

class Transport {
 public:
  virtual ~Transport() = default;
  /// POSTs a JSON body to `url`. Throws TransportError when no response
  /// arrives.
  virtual HttpResponse post_json(const std::string& url, const Headers& headers, const std::string& body,
                                 std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib client; supports http and https URLs with a path prefix.
class HttpTransport : public Transport {
 public:
  HttpResponse post_json(const std::string& url, const Headers& headers, const std::string& body,
                         std::chrono::milliseconds timeout) override;
};

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};
/// Throws std::invalid_argument for URLs without an http(s) scheme or host.
UrlParts split_url(const std::string& url);

/// `{base_url}/v1/chat/completions` without doubled slashes.
std::string completions_url(const std::string& base_url);

}  // namespace cope::backends
