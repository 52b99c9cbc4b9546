#include <doctest.h>

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "fixtures.h"
#include "foundry/core/error.h"
#include "foundry/core/serialize.h"
#include "foundry/providers/http_provider.h"
#include "foundry/providers/provider.h"
#include "foundry/providers/simulated.h"

using namespace foundry;
using namespace foundry::providers;

namespace {

VisionPrompt prompt_for(const std::string& purpose, const std::string& key) {
  VisionPrompt p;
  p.system_text = "sys";
  p.user_text = "user";
  p.purpose = purpose;
  p.request_key = key;
  return p;
}

struct LocalServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

}  // namespace

TEST_CASE("backoff is non-decreasing") {
  RetryPolicy p;
  for (int r = 1; r < 6; ++r) CHECK(p.backoff(r + 1) >= p.backoff(r));
  CHECK(p.backoff(1).count() == doctest::Approx(0.5));
  CHECK(p.backoff(3).count() == doctest::Approx(2.0));
}

TEST_CASE("complete_vision retries retryable failures then gives up") {
  SimulatedProviderScript s;
  s.always_fail = true;
  s.failure_class = TransportErrorClass::server_error;
  SimulatedProvider p("flaky", s);
  RetryPolicy policy;
  policy.max_retries = 2;
  std::vector<double> sleeps;
  try {
    complete_vision(p, prompt_for("caption", "k"), policy, [&](Seconds d) { sleeps.push_back(d.count()); });
    FAIL("expected TransportExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::transport_exhausted);
  }
  CHECK(p.call_count() == 3);
  CHECK(sleeps == std::vector<double>{0.5, 1.0});
}

TEST_CASE("complete_vision recovers after transient failures") {
  SimulatedProviderScript s;
  s.fail_first_calls = 2;
  SimulatedProvider p("flaky", s);
  const auto r = complete_vision(p, prompt_for("caption", "k"), RetryPolicy{}, [](Seconds) {});
  CHECK_FALSE(r.text.empty());
  CHECK(p.call_count() == 3);
}

TEST_CASE("non-retryable transport errors propagate unchanged") {
  SimulatedProviderScript s;
  s.always_fail = true;
  s.failure_class = TransportErrorClass::client_error;
  SimulatedProvider p("bad", s);
  CHECK_THROWS_AS(complete_vision(p, prompt_for("caption", "k"), RetryPolicy{}, [](Seconds) {}), TransportError);
  CHECK(p.call_count() == 1);
}

TEST_CASE("rotate_provider cycles and rejects an empty pool") {
  const std::vector<std::string> pool{"a", "b"};
  CHECK(rotate_provider(pool, Stage::caption, 0) == "a");
  CHECK(rotate_provider(pool, Stage::caption, 1) == "b");
  CHECK(rotate_provider(pool, Stage::caption, 2) == "a");
  try {
    rotate_provider(std::span<const std::string>{}, Stage::caption, 0);
    FAIL("expected EmptyPool");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::empty_pool);
  }
}

TEST_CASE("registry lookup") {
  ProviderRegistry reg;
  reg.add(std::make_shared<SimulatedProvider>("x", SimulatedProviderScript{}));
  CHECK(reg.contains("x"));
  CHECK(reg.ids() == std::vector<std::string>{"x"});
  CHECK_THROWS_AS(reg.get("y"), Error);
}

TEST_CASE("simulated provider output depends only on seed and request key") {
  SimulatedProviderScript s;
  s.seed = 5;
  SimulatedProvider a("p", s), b("p", s);
  const auto a1 = a.complete(prompt_for("caption", "img1/caption/1")).text;
  const auto a2 = a.complete(prompt_for("caption", "img2/caption/1")).text;
  const auto b2 = b.complete(prompt_for("caption", "img2/caption/1")).text;
  const auto b1 = b.complete(prompt_for("caption", "img1/caption/1")).text;
  CHECK(a1 == b1);
  CHECK(a2 == b2);
}

TEST_CASE("scripted responses are consumed in order and logged") {
  SimulatedProviderScript s;
  s.scripted_responses["judge"] = {"first", "second"};
  SimulatedProvider p("j", s);
  auto pr = prompt_for("judge", "k");
  pr.temperature = 0.7;
  CHECK(p.complete(pr).text == "first");
  CHECK(p.complete(pr).text == "second");
  CHECK(p.complete(pr).text != "second");
  const auto log = p.request_log();
  REQUIRE(log.size() == 3);
  CHECK(log[0].temperature == doctest::Approx(0.7));
  CHECK(log[0].purpose == "judge");
  CHECK(p.call_count("judge") == 3);
  CHECK(p.call_count("caption") == 0);
}

TEST_CASE("validation pass probability is honoured") {
  SimulatedProviderScript s;
  s.seed = 11;
  s.stage_behaviors["validate_caption"].validation_pass_probability = 0.3;
  SimulatedProvider p("v", s);
  int pass = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const auto j = json::parse(p.complete(prompt_for("validate_caption", "k" + std::to_string(i))).text);
    pass += j.at("pass").get<bool>() ? 1 : 0;
  }
  CHECK(static_cast<double>(pass) / n == doctest::Approx(0.3).epsilon(0.1));
}

TEST_CASE("chat request carries the image as a data URL and the schema hint") {
  fixtures::TempDir dir;
  const auto img = fixtures::make_images(dir.path(), 1).front();
  HttpProviderConfig cfg{"gpt", "http://localhost", "/v1/chat/completions", "m1", "", "Authorization", 5};
  VisionPrompt p = prompt_for("caption", "k");
  p.image_path = img.string();
  p.response_schema_hint = R"({"caption": string})";
  p.temperature = 0.9;
  const auto req = build_chat_request(cfg, p);
  CHECK(req["model"] == "m1");
  CHECK(req["temperature"].get<double>() == doctest::Approx(0.9));
  const std::string sys = req["messages"][0]["content"];
  CHECK(sys.find(R"({"caption": string})") != std::string::npos);
  const std::string url = req["messages"][1]["content"][1]["image_url"]["url"];
  CHECK(url.rfind("data:image/jpeg;base64,", 0) == 0);
  CHECK(base64_encode("hi") == "aGk=");
  CHECK(image_mime_type("a.PNG") == "image/png");
}

TEST_CASE("parse_chat_response") {
  const auto r = parse_chat_response(
      R"({"model":"m","choices":[{"message":{"content":"hello"}}],"usage":{"prompt_tokens":3,"completion_tokens":1}})",
      "x");
  CHECK(r.text == "hello");
  CHECK(r.model == "m");
  REQUIRE(r.token_usage);
  CHECK(r.token_usage->input == 3);
  CHECK_THROWS_AS(parse_chat_response("{}", "x"), Error);
  CHECK_THROWS_AS(parse_chat_response("nope", "x"), Error);
}

TEST_CASE("http provider against a local server") {
  LocalServer srv;
  std::atomic<int> hits{0};
  std::string seen_auth;
  srv.server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    seen_auth = req.get_header_value("Authorization");
    const auto body = json::parse(req.body);
    if (body["max_tokens"] == 7) {
      res.status = 429;
      return;
    }
    res.set_content(json{{"choices", {{{"message", {{"content", "a caption"}}}}}}}.dump(), "application/json");
  });
  srv.start();

  HttpProviderConfig cfg{"local", "http://127.0.0.1:" + std::to_string(srv.port), "/v1/chat/completions", "m", "",
                         "Authorization", 5};
  HttpVisionProvider p(cfg);
  CHECK(p.complete(prompt_for("caption", "k")).text == "a caption");
  CHECK(seen_auth.empty());

  ::setenv("FOUNDRY_TEST_KEY", "secret", 1);
  cfg.api_key_env = "FOUNDRY_TEST_KEY";
  HttpVisionProvider keyed(cfg);
  keyed.complete(prompt_for("caption", "k"));
  CHECK(seen_auth == "Bearer secret");

  auto limited = prompt_for("caption", "k");
  limited.max_output_tokens = 7;
  try {
    keyed.complete(limited);
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.error_class() == TransportErrorClass::rate_limited);
  }

  cfg.api_key_env = "FOUNDRY_TEST_KEY_UNSET_123";
  HttpVisionProvider unset(cfg);
  try {
    unset.complete(prompt_for("caption", "k"));
    FAIL("expected CredentialMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::credential_missing);
  }
}

TEST_CASE("http provider maps refused connections to a retryable class") {
  HttpProviderConfig cfg{"down", "http://127.0.0.1:1", "/v1/chat/completions", "m", "", "Authorization", 1};
  HttpVisionProvider p(cfg);
  try {
    p.complete(prompt_for("caption", "k"));
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(RetryPolicy{}.retryable.count(e.error_class()) == 1);
  }
}
