#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

#include <httplib.h>

#include "cope/backends/cache.hpp"
#include "cope/backends/chat.hpp"
#include "cope/backends/client.hpp"
#include "cope/backends/mock.hpp"
#include "cope/backends/transport.hpp"
#include "cope/synth/generate.hpp"
#include "cope/synth/oracle.hpp"
#include "temp_dir.hpp"

using namespace cope;
using namespace cope::backends;
using namespace std::chrono_literals;

namespace {

ChatRequest user_request(std::string content, double temperature = 0.0, int max_tokens = kReasoningMaxTokens) {
  ChatRequest r;
  r.messages.push_back({Role::user, std::move(content)});
  r.params = {temperature, max_tokens};
  return r;
}

std::string envelope(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::vector<HttpResponse> script) : script_(std::move(script)) {}
  HttpResponse post_json(const std::string& url, const Headers& headers, const std::string& body,
                         std::chrono::milliseconds) override {
    last_url = url;
    last_headers = headers;
    last_body = body;
    const auto i = std::min<std::size_t>(calls++, script_.size() - 1);
    if (script_[i].status < 0) throw TransportError("connection refused");
    return script_[i];
  }
  std::size_t calls = 0;
  std::string last_url;
  Headers last_headers;
  std::string last_body;

 private:
  std::vector<HttpResponse> script_;
};

BackendConfig http_config() {
  BackendConfig c;
  c.name = "remote";
  c.kind = BackendKind::http_chat;
  c.base_url = "http://example.invalid/api/";
  c.model_name = "m-1";
  c.auth_token_env = std::nullopt;
  return c;
}

}  // namespace

TEST_CASE("cache key: stable and sensitive to every field") {
  const auto a = user_request("hello");
  CHECK(cache_key(BackendKind::mock, "m", a) == cache_key(BackendKind::mock, "m", a));
  CHECK(cache_key(BackendKind::mock, "m", a).size() == 64);
  CHECK(cache_key(BackendKind::mock, "m", a) != cache_key(BackendKind::http_chat, "m", a));
  CHECK(cache_key(BackendKind::mock, "m", a) != cache_key(BackendKind::mock, "n", a));
  CHECK(cache_key(BackendKind::mock, "m", a) != cache_key(BackendKind::mock, "m", user_request("hello", 0.2)));
  CHECK(cache_key(BackendKind::mock, "m", a) != cache_key(BackendKind::mock, "m", user_request("hello", 0, 8)));
  auto sys = a;
  sys.messages[0].role = Role::system;
  CHECK(cache_key(BackendKind::mock, "m", a) != cache_key(BackendKind::mock, "m", sys));
}

TEST_CASE("cache key: no collisions over 100000 distinct requests") {
  std::set<std::string> keys;
  for (int i = 0; i < 100000; ++i) {
    keys.insert(cache_key(BackendKind::mock, "m", user_request("note " + std::to_string(i / 4), 0.2 * (i % 2),
                                                                (i / 2) % 2 ? 8 : 1024)));
  }
  CHECK(keys.size() == 100000);
}

TEST_CASE("cache: store, lookup and persistence") {
  TempDir tmp;
  const std::string key(64, 'a');
  {
    ResponseCache cache(tmp.path() / "c");
    CHECK_FALSE(cache.lookup(key).has_value());
    cache.store(key, "reply text", ojson{{"model", "m"}});
    CHECK(cache.lookup(key) == "reply text");
    CHECK_THROWS_AS(cache.store("../evil", "x"), std::invalid_argument);
  }
  ResponseCache reopened(tmp.path() / "c");
  CHECK(reopened.lookup(key) == "reply text");
  CHECK(std::filesystem::exists(tmp.path() / "c" / (key + ".meta.json")));
}

TEST_CASE("cache: concurrent stores from separate processes leave one complete entry") {
  TempDir tmp;
  const std::string key(64, 'b');
  const std::string value(200000, 'z');
  std::vector<pid_t> children;
  for (int i = 0; i < 6; ++i) {
    const pid_t pid = fork();
    if (pid == 0) {
      try {
        ResponseCache cache(tmp.path());
        for (int k = 0; k < 20; ++k) cache.store(key, value);
        _exit(0);
      } catch (...) {
        _exit(1);
      }
    }
    children.push_back(pid);
  }
  ResponseCache reader(tmp.path());
  for (int k = 0; k < 200; ++k) {
    const auto v = reader.lookup(key);
    if (v) CHECK(*v == value);
  }
  for (pid_t pid : children) {
    int status = 0;
    waitpid(pid, &status, 0);
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
  }
  CHECK(reader.lookup(key) == value);
  for (const auto& entry : std::filesystem::directory_iterator(tmp.path())) {
    CHECK(entry.path().filename().string().rfind(key, 0) == 0);
  }
}

TEST_CASE("backoff schedule") {
  CHECK(backoff_delay(1) == 500ms);
  CHECK(backoff_delay(2) == 1000ms);
  CHECK(backoff_delay(3) == 2000ms);
  CHECK(backoff_delay(7) == 30000ms);
  CHECK(backoff_delay(20) == 30000ms);
}

TEST_CASE("config validation lists every problem") {
  BackendConfig c = http_config();
  c.base_url = "";
  c.max_retries = -1;
  c.temperature = -0.5;
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg;
    for (const auto& d : e.details()) msg += d + "\n";
    CHECK(e.details().size() == 3);
    CHECK(msg.find("base_url") != std::string::npos);
    CHECK(msg.find("max_retries") != std::string::npos);
    CHECK(msg.find("temperature") != std::string::npos);
  }
}

TEST_CASE("config snapshot never carries the token") {
  setenv("COPE_TEST_SECRET", "s3cret-value", 1);
  BackendConfig c = http_config();
  c.auth_token_env = "COPE_TEST_SECRET";
  const std::string dumped = to_json(c).dump();
  CHECK(dumped.find("s3cret-value") == std::string::npos);
  CHECK(dumped.find("COPE_TEST_SECRET") != std::string::npos);
  const auto back = backend_config_from_json(json::parse(dumped));
  CHECK(back.base_url == c.base_url);
  CHECK(back.auth_token_env == c.auth_token_env);
}

TEST_CASE("urls") {
  CHECK(completions_url("http://h:8000") == "http://h:8000/v1/chat/completions");
  CHECK(completions_url("http://h:8000/proxy/") == "http://h:8000/proxy/v1/chat/completions");
  const auto parts = split_url("https://host.example:8443/a/b");
  CHECK(parts.origin == "https://host.example:8443");
  CHECK(parts.path == "/a/b");
  CHECK_THROWS(split_url("ftp://x/y"));
  CHECK_THROWS(split_url("http://"));
}

TEST_CASE("client: 5xx is retried max_retries times then fails") {
  auto transport = std::make_shared<ScriptedTransport>(std::vector<HttpResponse>{{500, "boom"}});
  auto config = http_config();
  config.max_retries = 3;
  ChatClient client(config, nullptr, transport);
  std::vector<std::chrono::milliseconds> sleeps;
  client.set_sleep([&](auto d) { sleeps.push_back(d); });
  try {
    client.complete(user_request("x"));
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.http_status() == 500);
    CHECK(e.attempts() == 4);
  }
  CHECK(transport->calls == 4);
  CHECK(sleeps == std::vector<std::chrono::milliseconds>{500ms, 1000ms, 2000ms});
}

TEST_CASE("client: transport errors and 429 recover") {
  auto transport = std::make_shared<ScriptedTransport>(
      std::vector<HttpResponse>{{-1, ""}, {429, "slow down"}, {200, envelope("4")}});
  ChatClient client(http_config(), nullptr, transport);
  client.set_sleep([](auto) {});
  const auto r = client.complete(user_request("x"));
  CHECK(r.content == "4");
  CHECK(r.attempt == 3);
  CHECK(transport->calls == 3);
}

TEST_CASE("client: 4xx fails at once with the body excerpt") {
  auto transport = std::make_shared<ScriptedTransport>(std::vector<HttpResponse>{{400, "bad model name"}});
  ChatClient client(http_config(), nullptr, transport);
  client.set_sleep([](auto) {});
  try {
    client.complete(user_request("x"));
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.http_status() == 400);
    CHECK(std::string(e.what()).find("bad model name") != std::string::npos);
  }
  CHECK(transport->calls == 1);
}

TEST_CASE("client: malformed envelope is a backend error") {
  for (const std::string body : {"not json", "{}", R"({"choices":[]})", R"({"choices":[{"message":{}}]})"}) {
    auto transport = std::make_shared<ScriptedTransport>(std::vector<HttpResponse>{{200, body}});
    ChatClient client(http_config(), nullptr, transport);
    CHECK_THROWS_AS(client.complete(user_request("x")), BackendError);
    CHECK(transport->calls == 1);
  }
}

TEST_CASE("client: request body and cache hits") {
  TempDir tmp;
  auto cache = std::make_shared<ResponseCache>(tmp.path());
  auto transport = std::make_shared<ScriptedTransport>(std::vector<HttpResponse>{{200, envelope("reply")}});
  ChatClient client(http_config(), cache, transport);
  const auto req = user_request("prompt body", 0.0, 8);
  const auto first = client.complete(req);
  const auto second = client.complete(req);
  CHECK_FALSE(first.from_cache);
  CHECK(second.from_cache);
  CHECK(second.content == "reply");
  CHECK(transport->calls == 1);
  CHECK(client.backend_calls() == 1);
  CHECK(transport->last_url == "http://example.invalid/api/v1/chat/completions");
  const auto body = json::parse(transport->last_body);
  CHECK(body["model"] == "m-1");
  CHECK(body["max_tokens"] == 8);
  CHECK(body["temperature"] == 0.0);
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"] == "prompt body");
}

TEST_CASE("client: real HTTP server with a path prefix and bearer token") {
  httplib::Server server;
  std::string seen_auth;
  server.Post("/proxy/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    const auto body = json::parse(req.body);
    res.set_content(envelope("echo:" + body["messages"].back()["content"].get<std::string>()), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("COPE_TEST_TOKEN", "tok-123", 1);
  auto config = http_config();
  config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/proxy";
  config.auth_token_env = "COPE_TEST_TOKEN";
  ChatClient client(config);
  const auto r = client.complete(user_request("ping"));
  CHECK(r.content == "echo:ping");
  CHECK(seen_auth == "Bearer tok-123");

  server.stop();
  worker.join();
}

TEST_CASE("client: unreachable server exhausts retries") {
  auto config = http_config();
  config.base_url = "http://127.0.0.1:1";
  config.max_retries = 1;
  config.request_timeout = 500ms;
  ChatClient client(config);
  client.set_sleep([](auto) {});
  CHECK_THROWS_AS(client.complete(user_request("x")), BackendError);
}

TEST_CASE("mock: reasoning and extraction follow the synthetic oracle") {
  synth::SynthConfig sc;
  sc.n = 40;
  sc.seed = 5;
  const auto corpus = synth::generate_corpus(sc);
  for (std::size_t i = 0; i < corpus.cohort.size(); ++i) {
    const auto& note = corpus.cohort.records()[i].note_text;
    const int expected = synth::oracle_mrs(corpus.profiles[i]);
    const std::string reasoning = mock_complete(user_request("Summary:\n" + note));
    CHECK(reasoning.find("the most likely mRS score at 90 days is " + std::to_string(expected)) !=
          std::string::npos);
    CHECK(mock_complete(user_request("Reasoning:\n" + reasoning + "\nAnswer:")) == std::to_string(expected));
    CHECK(mock_complete(user_request("Give a single integer.\n" + note)) == std::to_string(expected));
  }
  CHECK_THROWS_AS(mock_complete(user_request("unrelated prompt")), BackendError);
}

TEST_CASE("mock: noise stays within the level and is reproducible") {
  synth::SynthConfig sc;
  sc.n = 200;
  sc.seed = 9;
  const auto corpus = synth::generate_corpus(sc);
  int shifted = 0;
  for (std::size_t i = 0; i < corpus.cohort.size(); ++i) {
    const auto req = user_request("Give a single integer.\n" + corpus.cohort.records()[i].note_text);
    const int expected = synth::oracle_mrs(corpus.profiles[i]);
    const std::string a = mock_complete(req, 1, 77);
    CHECK(a == mock_complete(req, 1, 77));
    const int got = std::stoi(a);
    CHECK(std::abs(got - expected) <= 1);
    CHECK(got >= 0);
    CHECK(got <= 6);
    shifted += got != expected;
  }
  CHECK(shifted > 40);
  CHECK(shifted < 160);
}

TEST_CASE("mock backend through the client with cache") {
  TempDir tmp;
  synth::SynthConfig sc;
  sc.n = 1;
  const auto corpus = synth::generate_corpus(sc);
  BackendConfig config;
  auto cache = std::make_shared<ResponseCache>(tmp.path());
  ChatClient client(config, cache);
  const auto req = user_request(corpus.cohort.records()[0].note_text);
  const auto a = client.complete(req);
  const auto b = client.complete(req);
  CHECK(a.content == b.content);
  CHECK(b.from_cache);
  CHECK(client.backend_calls() == 1);
}
