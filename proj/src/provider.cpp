#include "fxctl/provider.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fxctl/error.hpp"

namespace fxctl {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kStage = "provider";
constexpr std::size_t kReplayChunk = 64;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, kStage, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string request_text(const ProviderRequest& request) {
  std::string all;
  for (const auto& m : request.messages)
    for (const auto& p : m.parts)
      if (p.kind == ContentPart::Kind::text) all += p.text + "\n";
  return all;
}

// Replays recorded text through the stream callback in fixed-size chunks.
void replay_stream(const std::string& text, const StreamCallback& on_delta) {
  if (!on_delta) return;
  for (std::size_t i = 0; i < text.size(); i += kReplayChunk) on_delta(std::string_view(text).substr(i, kReplayChunk));
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, kStage, "sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string base64_decode(std::string_view text) {
  std::string clean;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) clean += c;
  if (clean.size() % 4 != 0) throw Error(ErrorKind::parse, kStage, "base64 length is not a multiple of 4");
  std::string out(3 * clean.size() / 4, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
  if (n < 0) throw Error(ErrorKind::parse, kStage, "malformed base64 payload");
  // EVP_DecodeBlock keeps the bytes behind '=' padding.
  std::size_t pad = 0;
  if (!clean.empty() && clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string canonical_request(const ProviderRequest& request) {
  ordered_json j;
  j["messages"] = ordered_json::array();
  for (const auto& m : request.messages) {
    ordered_json parts = ordered_json::array();
    for (const auto& p : m.parts) {
      if (p.kind == ContentPart::Kind::text) {
        parts.push_back({{"type", "text"}, {"text", p.text}});
      } else {
        parts.push_back({{"type", "image"}, {"mime", p.mime_type}, {"sha256", sha256_hex(p.data)}});
      }
    }
    j["messages"].push_back({{"role", m.role}, {"parts", parts}});
  }
  j["temperature"] = request.temperature;
  j["max_tokens"] = request.max_tokens;
  j["structured_output"] = request.structured_output;
  return j.dump();
}

std::string request_hash(const ProviderRequest& request) { return sha256_hex(canonical_request(request)); }

FixtureMode parse_fixture_mode(std::string_view text) {
  if (text == "replay") return FixtureMode::replay;
  if (text == "record") return FixtureMode::record;
  if (text == "replay-or-record") return FixtureMode::replay_or_record;
  throw Error(ErrorKind::validation, kStage, "unknown fixture mode '" + std::string(text) + "'");
}

FixtureProvider::FixtureProvider(std::filesystem::path dir, FixtureMode mode, std::shared_ptr<Provider> upstream)
    : dir_(std::move(dir)), mode_(mode), upstream_(std::move(upstream)) {
  if (mode_ != FixtureMode::replay && !upstream_) {
    throw Error(ErrorKind::validation, kStage, "record mode needs an upstream provider");
  }
}

std::filesystem::path FixtureProvider::fixture_path(const ProviderRequest& request) const {
  return dir_ / (request_hash(request) + ".json");
}

std::optional<ProviderResponse> FixtureProvider::lookup(const ProviderRequest& request) const {
  const auto path = fixture_path(request);
  std::lock_guard lock(mu_);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const auto j = json::parse(read_text(path));
    ProviderResponse r;
    r.text = j.at("response").at("text").get<std::string>();
    const auto usage = j.at("response").value("usage", json::object());
    r.usage.prompt_tokens = usage.value("prompt_tokens", 0L);
    r.usage.completion_tokens = usage.value("completion_tokens", 0L);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, kStage, "corrupt fixture '" + path.string() + "': " + e.what());
  }
}

void FixtureProvider::record(const ProviderRequest& request, const ProviderResponse& response) {
  ordered_json j;
  j["format"] = "fxctl.fixture";
  j["version"] = 1;
  j["hash"] = request_hash(request);
  j["request"] = ordered_json::parse(canonical_request(request));
  j["response"] = {{"text", response.text},
                   {"usage",
                    {{"prompt_tokens", response.usage.prompt_tokens},
                     {"completion_tokens", response.usage.completion_tokens}}}};
  const auto path = fixture_path(request);
  std::lock_guard lock(mu_);
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, kStage, "cannot write fixture '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

ProviderResponse FixtureProvider::send(const ProviderRequest& request, const StreamCallback& on_delta) {
  if (mode_ != FixtureMode::record) {
    if (auto hit = lookup(request)) {
      {
        std::lock_guard lock(mu_);
        ++hits_;
      }
      replay_stream(hit->text, on_delta);
      return *hit;
    }
    std::lock_guard lock(mu_);
    ++misses_;
    if (mode_ == FixtureMode::replay) {
      throw Error(ErrorKind::fixture_miss, kStage,
                  "no fixture for request " + request_hash(request) + " in '" + dir_.string() + "'");
    }
  }
  auto response = upstream_->send(request, on_delta);
  record(request, response);
  return response;
}

std::size_t FixtureProvider::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t FixtureProvider::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

ScriptedProvider::ScriptedProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {}

std::vector<ScriptedProvider::Rule> ScriptedProvider::rules_from_json(std::string_view document) {
  try {
    const auto j = json::parse(document);
    std::vector<Rule> rules;
    for (const auto& r : j.at("rules")) {
      Rule rule;
      rule.match = r.at("match").get<std::vector<std::string>>();
      const auto& resp = r.at("response");
      rule.response = resp.is_string() ? resp.get<std::string>() : resp.dump(2);
      rules.push_back(std::move(rule));
    }
    return rules;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, kStage, std::string("malformed provider script: ") + e.what());
  }
}

std::vector<ScriptedProvider::Rule> ScriptedProvider::rules_from_file(const std::filesystem::path& path) {
  return rules_from_json(read_text(path));
}

ProviderResponse ScriptedProvider::send(const ProviderRequest& request, const StreamCallback& on_delta) {
  const auto text = request_text(request);
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  for (const auto& rule : rules_) {
    bool all = true;
    for (const auto& m : rule.match) all = all && text.find(m) != std::string::npos;
    if (!all) continue;
    ProviderResponse r;
    r.text = rule.response;
    r.usage.prompt_tokens = static_cast<long>(text.size() / 4);
    r.usage.completion_tokens = static_cast<long>(r.text.size() / 4);
    replay_stream(r.text, on_delta);
    return r;
  }
  throw Error(ErrorKind::fixture_miss, kStage, "no scripted rule matches request " + request_hash(request));
}

std::size_t ScriptedProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

}  // namespace fxctl
