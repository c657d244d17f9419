#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fxctl {

struct ContentPart {
  enum class Kind { text, image };
  Kind kind = Kind::text;
  std::string text;                  // text parts
  std::string mime_type;             // image parts
  std::string data;                  // raw image bytes

  static ContentPart make_text(std::string t) { return {Kind::text, std::move(t), {}, {}}; }
  static ContentPart make_image(std::string bytes, std::string mime = "image/png") {
    return {Kind::image, {}, std::move(mime), std::move(bytes)};
  }
  bool operator==(const ContentPart&) const = default;
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::vector<ContentPart> parts;

  bool operator==(const ChatMessage&) const = default;
};

struct ProviderRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.1;
  int max_tokens = 1000;
  bool structured_output = false;
  bool stream = false;
  std::map<std::string, std::string> transport_headers;  // never hashed
};

struct Usage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct ProviderResponse {
  std::string text;
  Usage usage;
  double latency_ms = 0.0;
};

// Receives text deltas as they arrive when a request streams.
using StreamCallback = std::function<void(std::string_view delta)>;

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderResponse send(const ProviderRequest& request, const StreamCallback& on_delta = {}) = 0;
};

std::string sha256_hex(std::string_view bytes);
std::string base64_encode(std::string_view bytes);
// Throws Error(parse) on malformed input.
std::string base64_decode(std::string_view text);

// Compact JSON over messages (images as sha256 digests), temperature,
// max_tokens and structured_output. Model, stream flag and headers are
// left out so credentials and transport settings never change the key.
std::string canonical_request(const ProviderRequest& request);
std::string request_hash(const ProviderRequest& request);

enum class FixtureMode { replay, record, replay_or_record };

FixtureMode parse_fixture_mode(std::string_view text);

// One <hash>.json file per request under `dir`. Replay never fabricates:
// a miss is Error(fixture_miss). Record mode forwards to `upstream` and
// persists the result.
class FixtureProvider : public Provider {
 public:
  FixtureProvider(std::filesystem::path dir, FixtureMode mode, std::shared_ptr<Provider> upstream = nullptr);

  ProviderResponse send(const ProviderRequest& request, const StreamCallback& on_delta = {}) override;
  void record(const ProviderRequest& request, const ProviderResponse& response);
  std::optional<ProviderResponse> lookup(const ProviderRequest& request) const;

  std::filesystem::path fixture_path(const ProviderRequest& request) const;
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  std::filesystem::path dir_;
  FixtureMode mode_;
  std::shared_ptr<Provider> upstream_;
  mutable std::mutex mu_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// Answers from a rule list: the first rule whose substrings all occur in
// the request's text wins. Used to author fixtures without a network.
class ScriptedProvider : public Provider {
 public:
  struct Rule {
    std::vector<std::string> match;
    std::string response;
  };

  explicit ScriptedProvider(std::vector<Rule> rules);
  // {"rules": [{"match": [...], "response": "text" | {...}}]}
  static std::vector<Rule> rules_from_json(std::string_view document);
  static std::vector<Rule> rules_from_file(const std::filesystem::path& path);

  ProviderResponse send(const ProviderRequest& request, const StreamCallback& on_delta = {}) override;
  std::size_t calls() const;

 private:
  std::vector<Rule> rules_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

struct LiveConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_seconds = 60;
  int retries = 1;
};

LiveConfig parse_live_config(std::string_view document);
LiveConfig load_live_config(const std::filesystem::path& path);

// OpenAI-compatible chat-completions body for `request`.
std::string chat_completions_body(const ProviderRequest& request, const std::string& model);
// Extracts choices[0].message.content and usage. Throws Error(transport).
ProviderResponse parse_chat_completion(std::string_view body);

// Incremental decoder for "data: {...}" server-sent events.
class SseDecoder {
 public:
  // Returns the content deltas completed by this chunk.
  std::vector<std::string> feed(std::string_view chunk);
  bool done() const noexcept { return done_; }

 private:
  std::string buffer_;
  bool done_ = false;
};

class LiveProvider : public Provider {
 public:
  // Reads the API key from the configured environment variable; throws
  // Error(validation) when it is unset.
  explicit LiveProvider(LiveConfig config);
  LiveProvider(LiveConfig config, std::string api_key);

  ProviderResponse send(const ProviderRequest& request, const StreamCallback& on_delta = {}) override;
  const LiveConfig& config() const noexcept { return config_; }

 private:
  LiveConfig config_;
  std::string api_key_;
};

}  // namespace fxctl
