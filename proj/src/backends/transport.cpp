#include "cope/backends/transport.hpp"

#include <httplib.h>

namespace cope::backends {

UrlParts split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("URL without scheme: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw std::invalid_argument("unsupported URL scheme: " + url);
  const auto host_begin = scheme_end + 3;
  const auto path_begin = url.find('/', host_begin);
  UrlParts parts;
  parts.origin = url.substr(0, path_begin);
  if (parts.origin.size() <= host_begin) throw std::invalid_argument("URL without host: " + url);
  parts.path = path_begin == std::string::npos ? "/" : url.substr(path_begin);
  return parts;
}

std::string completions_url(const std::string& base_url) {
  std::string base = base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + "/v1/chat/completions";
}

HttpResponse HttpTransport::post_json(const std::string& url, const Headers& headers, const std::string& body,
                                      std::chrono::milliseconds timeout) {
  UrlParts parts;
  try {
    parts = split_url(url);
  } catch (const std::invalid_argument& e) {
    throw TransportError(e.what());
  }
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(parts.path, h, body, "application/json");
  if (!res) throw TransportError("request to " + parts.origin + " failed: " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

}  // namespace cope::backends
