#include <httplib.h>
#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <json.hpp>

#include "fxctl/error.hpp"
#include "fxctl/provider.hpp"

namespace fxctl {
namespace {

namespace fs = std::filesystem;

ProviderRequest sample(std::string text = "decide add or edit") {
  ProviderRequest r;
  r.messages.push_back({"user", {ContentPart::make_text(std::move(text)), ContentPart::make_image("\x89PNG....")}});
  r.temperature = 0.1;
  r.max_tokens = 4000;
  r.structured_output = true;
  return r;
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("fxctl_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

TEST(Hashing, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(base64_encode("hello"), "aGVsbG8=");
  EXPECT_EQ(base64_encode(""), "");
}

TEST(Hashing, IgnoresTransportMetadata) {
  auto a = sample();
  auto b = sample();
  b.transport_headers["Authorization"] = "Bearer sk-secret";
  b.stream = true;
  EXPECT_EQ(request_hash(a), request_hash(b));
  EXPECT_EQ(canonical_request(a).find("secret"), std::string::npos);
}

TEST(Hashing, SensitiveToContent) {
  const auto base = request_hash(sample());
  EXPECT_NE(request_hash(sample("other prompt")), base);
  auto t = sample();
  t.temperature = 0.2;
  EXPECT_NE(request_hash(t), base);
  auto m = sample();
  m.max_tokens = 300;
  EXPECT_NE(request_hash(m), base);
  auto i = sample();
  i.messages[0].parts[1].data = "different image";
  EXPECT_NE(request_hash(i), base);
  auto s = sample();
  s.structured_output = false;
  EXPECT_NE(request_hash(s), base);
}

TEST(Fixtures, RecordThenReplay) {
  const auto dir = scratch_dir("fixtures");
  auto upstream = std::make_shared<ScriptedProvider>(
      std::vector<ScriptedProvider::Rule>{{{"add or edit"}, R"({"should_add_particle": true})"}});
  FixtureProvider recorder(dir, FixtureMode::record, upstream);
  EXPECT_EQ(recorder.send(sample()).text, R"({"should_add_particle": true})");
  EXPECT_TRUE(fs::exists(recorder.fixture_path(sample())));

  FixtureProvider replay(dir, FixtureMode::replay);
  auto keyed = sample();
  keyed.transport_headers["Authorization"] = "Bearer x";
  EXPECT_EQ(replay.send(keyed).text, R"({"should_add_particle": true})");
  EXPECT_EQ(replay.hits(), 1u);
  fs::remove_all(dir);
}

TEST(Fixtures, MissIsExplicit) {
  FixtureProvider replay(scratch_dir("empty"), FixtureMode::replay);
  try {
    replay.send(sample());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::fixture_miss);
  }
  EXPECT_EQ(replay.misses(), 1u);
  EXPECT_THROW(FixtureProvider(scratch_dir("x"), FixtureMode::record), Error);
}

TEST(Fixtures, ReplayOrRecordFillsGaps) {
  const auto dir = scratch_dir("gaps");
  auto upstream = std::make_shared<ScriptedProvider>(std::vector<ScriptedProvider::Rule>{{{}, "same"}});
  FixtureProvider p(dir, FixtureMode::replay_or_record, upstream);
  p.send(sample());
  p.send(sample());
  EXPECT_EQ(upstream->calls(), 1u);
  EXPECT_EQ(p.hits(), 1u);
  fs::remove_all(dir);
}

TEST(Fixtures, StreamReplayDeliversWholeText) {
  const auto dir = scratch_dir("stream");
  std::string long_text(200, 'x');
  auto upstream = std::make_shared<ScriptedProvider>(std::vector<ScriptedProvider::Rule>{{{}, long_text}});
  FixtureProvider p(dir, FixtureMode::replay_or_record, upstream);
  p.send(sample());
  std::string got;
  int chunks = 0;
  p.send(sample(), [&](std::string_view d) {
    got += d;
    ++chunks;
  });
  EXPECT_EQ(got, long_text);
  EXPECT_GT(chunks, 1);
  fs::remove_all(dir);
}

TEST(Scripted, FirstMatchWinsAndMissThrows) {
  ScriptedProvider p(ScriptedProvider::rules_from_json(R"({"rules": [
      {"match": ["alpha", "beta"], "response": "both"},
      {"match": ["alpha"], "response": {"k": 1}}]})"));
  EXPECT_EQ(p.send(sample("alpha beta")).text, "both");
  EXPECT_EQ(p.send(sample("alpha only")).text, "{\n  \"k\": 1\n}");
  EXPECT_THROW(p.send(sample("gamma")), Error);
}

TEST(Live, RequestBodyShape) {
  auto r = sample();
  r.messages.insert(r.messages.begin(), ChatMessage{"system", {ContentPart::make_text("sys")}});
  const auto j = nlohmann::json::parse(chat_completions_body(r, "gpt-4o"));
  EXPECT_EQ(j["model"], "gpt-4o");
  EXPECT_EQ(j["messages"][0]["content"], "sys");
  EXPECT_EQ(j["messages"][1]["content"][1]["type"], "image_url");
  EXPECT_TRUE(j["messages"][1]["content"][1]["image_url"]["url"].get<std::string>().starts_with(
      "data:image/png;base64,"));
  EXPECT_EQ(j["response_format"]["type"], "json_object");
  EXPECT_EQ(j["max_tokens"], 4000);
  EXPECT_FALSE(j.contains("stream"));
}

TEST(Live, SseDecoderAcrossChunks) {
  SseDecoder d;
  auto a = d.feed("data: {\"choices\":[{\"delta\":{\"content\":\"He\"}}]}\n\ndata: {\"choi");
  auto b = d.feed("ces\":[{\"delta\":{\"content\":\"llo\"}}]}\r\n\ndata: [DONE]\n\n");
  EXPECT_EQ(a, std::vector<std::string>{"He"});
  EXPECT_EQ(b, std::vector<std::string>{"llo"});
  EXPECT_TRUE(d.done());
}

TEST(Live, ConfigParsing) {
  const auto c = parse_live_config(R"({"base_url": "http://localhost:1", "model": "m", "retries": 2})");
  EXPECT_EQ(c.model, "m");
  EXPECT_EQ(c.retries, 2);
  EXPECT_EQ(c.timeout_seconds, 60);
  EXPECT_THROW(parse_live_config(R"({"timeout_seconds": 0})"), Error);
}

// Local mock of a chat-completions endpoint.
class MockServer {
 public:
  MockServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      const int n = ++requests;
      if (n <= fail_first) {
        res.status = 503;
        res.set_content("busy", "text/plain");
        return;
      }
      if (bad_request) {
        res.status = 400;
        res.set_content(R"({"error": {"message": "bad"}})", "application/json");
        return;
      }
      const auto j = nlohmann::json::parse(req.body);
      if (j.value("stream", false)) {
        res.set_content(
            "data: {\"choices\":[{\"delta\":{\"content\":\"{\\\"a\\\"\"}}]}\n\n"
            "data: {\"choices\":[{\"delta\":{\"content\":\": 1}\"}}]}\n\n"
            "data: [DONE]\n\n",
            "text/event-stream");
        return;
      }
      res.set_content(R"({"choices": [{"message": {"role": "assistant", "content": "{\"ok\": true}"}}],
                          "usage": {"prompt_tokens": 12, "completion_tokens": 3}})",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  LiveConfig config() const {
    LiveConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_);
    c.timeout_seconds = 5;
    return c;
  }

  std::atomic<int> requests{0};
  int fail_first = 0;
  bool bad_request = false;
  std::string last_body, last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(Live, RoundTripAgainstMock) {
  MockServer mock;
  LiveProvider p(mock.config(), "sk-test");
  const auto r = p.send(sample());
  EXPECT_EQ(r.text, "{\"ok\": true}");
  EXPECT_EQ(r.usage.prompt_tokens, 12);
  EXPECT_EQ(mock.last_auth, "Bearer sk-test");
  EXPECT_NE(mock.last_body.find("json_object"), std::string::npos);
}

TEST(Live, StreamingSurfacesDeltas) {
  MockServer mock;
  LiveProvider p(mock.config(), "k");
  auto req = sample();
  req.stream = true;
  std::vector<std::string> deltas;
  const auto r = p.send(req, [&](std::string_view d) { deltas.emplace_back(d); });
  EXPECT_EQ(r.text, "{\"a\": 1}");
  EXPECT_EQ(deltas.size(), 2u);
}

TEST(Live, RetriesOnceThenFails) {
  MockServer mock;
  mock.fail_first = 1;
  LiveProvider p(mock.config(), "k");
  EXPECT_EQ(p.send(sample()).text, "{\"ok\": true}");
  EXPECT_EQ(mock.requests, 2);

  MockServer down;
  down.fail_first = 5;
  LiveProvider q(down.config(), "k");
  try {
    q.send(sample());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::transport);
  }
  EXPECT_EQ(down.requests, 2);
}

TEST(Live, ClientErrorNotRetried) {
  MockServer mock;
  mock.bad_request = true;
  LiveProvider p(mock.config(), "k");
  EXPECT_THROW(p.send(sample()), Error);
  EXPECT_EQ(mock.requests, 1);
}

TEST(Live, MissingKeyRejected) {
  LiveConfig c;
  c.api_key_env = "FXCTL_TEST_UNSET_KEY_VARIABLE";
  EXPECT_THROW(LiveProvider{c}, Error);
}

}  // namespace
}  // namespace fxctl
