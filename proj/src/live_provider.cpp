#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fxctl/error.hpp"
#include "fxctl/provider.hpp"

namespace fxctl {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kStage = "provider";

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

LiveConfig parse_live_config(std::string_view document) {
  try {
    const auto j = json::parse(document);
    LiveConfig c;
    c.base_url = j.value("base_url", c.base_url);
    c.path = j.value("path", c.path);
    c.model = j.value("model", c.model);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.retries = j.value("retries", c.retries);
    if (c.timeout_seconds <= 0 || c.retries < 0) {
      throw Error(ErrorKind::validation, kStage, "timeout must be positive and retries non-negative");
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, kStage, std::string("malformed provider config: ") + e.what());
  }
}

LiveConfig load_live_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, kStage, "cannot read provider config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_live_config(ss.str());
}

std::string chat_completions_body(const ProviderRequest& request, const std::string& model) {
  ordered_json body;
  body["model"] = model;
  body["messages"] = ordered_json::array();
  for (const auto& m : request.messages) {
    const bool text_only = m.parts.size() == 1 && m.parts[0].kind == ContentPart::Kind::text;
    if (text_only) {
      body["messages"].push_back({{"role", m.role}, {"content", m.parts[0].text}});
      continue;
    }
    ordered_json content = ordered_json::array();
    for (const auto& p : m.parts) {
      if (p.kind == ContentPart::Kind::text) {
        content.push_back({{"type", "text"}, {"text", p.text}});
      } else {
        const auto url = "data:" + p.mime_type + ";base64," + base64_encode(p.data);
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
      }
    }
    body["messages"].push_back({{"role", m.role}, {"content", content}});
  }
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  if (request.structured_output) body["response_format"] = {{"type", "json_object"}};
  if (request.stream) body["stream"] = true;
  return body.dump();
}

ProviderResponse parse_chat_completion(std::string_view body) {
  try {
    const auto j = json::parse(body);
    if (j.contains("error")) {
      throw Error(ErrorKind::transport, kStage, "provider error: " + j["error"].value("message", j["error"].dump()));
    }
    ProviderResponse r;
    const auto& content = j.at("choices").at(0).at("message").at("content");
    r.text = content.is_null() ? "" : content.get<std::string>();
    if (j.contains("usage")) {
      r.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
      r.usage.completion_tokens = j["usage"].value("completion_tokens", 0L);
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::transport, kStage, std::string("unexpected completion document: ") + e.what());
  }
}

std::vector<std::string> SseDecoder::feed(std::string_view chunk) {
  buffer_.append(chunk);
  std::vector<std::string> out;
  std::size_t nl;
  while ((nl = buffer_.find('\n')) != std::string::npos) {
    std::string line = buffer_.substr(0, nl);
    buffer_.erase(0, nl + 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.starts_with("data:")) continue;
    std::string_view data(line);
    data.remove_prefix(5);
    while (!data.empty() && data.front() == ' ') data.remove_prefix(1);
    if (data == "[DONE]") {
      done_ = true;
      continue;
    }
    try {
      const auto j = json::parse(data);
      const auto& choices = j.at("choices");
      if (choices.empty()) continue;
      const auto& delta = choices[0].value("delta", json::object());
      if (delta.contains("content") && delta["content"].is_string()) out.push_back(delta["content"]);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::transport, kStage, std::string("malformed stream event: ") + e.what());
    }
  }
  return out;
}

LiveProvider::LiveProvider(LiveConfig config) : config_(std::move(config)) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorKind::validation, kStage, "live provider needs the " + config_.api_key_env + " environment variable");
  }
  api_key_ = key;
}

LiveProvider::LiveProvider(LiveConfig config, std::string api_key)
    : config_(std::move(config)), api_key_(std::move(api_key)) {}

ProviderResponse LiveProvider::send(const ProviderRequest& request, const StreamCallback& on_delta) {
  const auto started = std::chrono::steady_clock::now();
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);

  httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
  for (const auto& [k, v] : request.transport_headers) headers.emplace(k, v);
  const auto body = chat_completions_body(request, config_.model);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    httplib::Request req;
    req.method = "POST";
    req.path = config_.path;
    req.headers = headers;
    req.body = body;
    req.set_header("Content-Type", "application/json");

    std::string raw;
    std::string streamed;
    SseDecoder decoder;
    if (request.stream) {
      req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t, std::uint64_t) {
        raw.append(data, len);
        for (auto& d : decoder.feed(std::string_view(data, len))) {
          if (on_delta) on_delta(d);
          streamed += d;
        }
        return true;
      };
    }

    auto result = client.send(req);
    if (!result) {
      last_error = "transport failure: " + httplib::to_string(result.error());
      continue;
    }
    const int status = result->status;
    const std::string& payload = request.stream ? raw : result->body;
    if (status != 200) {
      last_error = "HTTP " + std::to_string(status) + ": " + payload.substr(0, 300);
      if (retryable(status)) continue;
      throw Error(ErrorKind::transport, kStage, last_error);
    }

    ProviderResponse r;
    if (request.stream) {
      r.text = std::move(streamed);
    } else {
      r = parse_chat_completion(payload);
      if (on_delta) on_delta(r.text);
    }
    r.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    if (r.text.empty()) throw Error(ErrorKind::transport, kStage, "empty completion");
    return r;
  }
  throw Error(ErrorKind::transport, kStage, last_error);
}

}  // namespace fxctl
