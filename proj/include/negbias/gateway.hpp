#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <unordered_map>
#include <vector>

namespace negbias {

enum class Role : std::uint8_t { system, user, assistant };

std::string_view to_string(Role r);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  // Caller-chosen label ("probe-q1-t0", ...). Scripted providers key on it;
  // it is part of the cache key but never sent over the wire.
  std::string tag;
};

/// Throws std::invalid_argument if the request violates its invariants.
void validate(const ChatRequest& request);

/// Wire body for the chat-completions endpoint.
std::string request_body(const ChatRequest& request);

struct CacheKey {
  std::array<std::uint8_t, 32> digest{};

  [[nodiscard]] std::string hex() const;
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

/// SHA-256 of the canonical JSON serialization of (provider id, request).
CacheKey make_cache_key(std::string_view provider_id, const ChatRequest& request);

/// A chat-completion backend. Implementations must be safe to call from
/// several threads at once.
class Provider {
 public:
  virtual ~Provider() = default;
  /// Stable identity folded into cache keys.
  [[nodiscard]] virtual std::string id() const = 0;
  /// Throws ProviderError (or Timeout) on failure.
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct HttpProviderConfig {
  std::string base_url;  // e.g. "https://api.openai.com/v1"
  std::string api_key;   // sent as a Bearer token when nonempty
  std::chrono::seconds timeout{120};
};

/// POSTs to {base_url}/chat/completions and returns choices[0].message.content.
class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config);
  [[nodiscard]] std::string id() const override;
  std::string complete(const ChatRequest& request) override;

 private:
  HttpProviderConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

/// One scripted reply. `match` is an exact key or, in tag mode, a '*' glob.
/// Exactly one of `response` and `choose` is set: `choose` answers
/// "Answer: (X)" where "(X) <choose>" is the option line found in the
/// conversation.
struct ScriptRule {
  std::string match;
  std::optional<std::string> response;
  std::optional<std::string> choose;
};

/// Offline, deterministic provider for tests and dry runs.
///
/// Tag mode looks up request.tag: exact rules win, then glob rules in
/// declaration order. Strict mode keys on the full message text, rendered as
/// "<role>: <content>" lines joined by '\n', and accepts exact rules only.
class ScriptedProvider final : public Provider {
 public:
  enum class Mode { tag, strict };

  ScriptedProvider(Mode mode, std::vector<ScriptRule> rules, std::string identity = "scripted");

  /// JSON file: {"mode": "tag"|"strict", "responses": {key: text},
  ///             "rules": [{"match": key, "response": text | "choose": option}]}
  static ScriptedProvider from_file(const std::filesystem::path& path);

  static std::string strict_key(const ChatRequest& request);

  [[nodiscard]] std::string id() const override { return identity_; }
  std::string complete(const ChatRequest& request) override;

 private:
  Mode mode_;
  std::vector<ScriptRule> rules_;
  std::unordered_map<std::string, std::size_t> exact_;
  std::vector<std::size_t> globs_;
  std::string identity_;
};

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{30'000};

  [[nodiscard]] std::chrono::milliseconds delay_before(int attempt) const;
};

/// 429, 408, 5xx and transport failures (status 0) are retried.
bool is_transient(const std::exception& e);

/// One file per key under `dir`, named by the lowercase hex digest, holding
/// the raw response text.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  [[nodiscard]] std::optional<std::string> get(const CacheKey& key) const;
  void put(const CacheKey& key, const std::string& text) const;
  void clear() const;
  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct GatewayOptions {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 1024;
  int concurrency = 4;
  RetryPolicy retry;
  std::optional<std::filesystem::path> cache_dir;
};

struct Completion {
  std::string text;
  bool cache_hit = false;
};

/// Provider access with retries, an in-flight bound and an optional cache.
/// All member functions are safe for concurrent use.
class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, GatewayOptions options);

  /// Provider call with exponential-backoff retries on transient errors.
  std::string complete(const ChatRequest& request);

  /// complete() behind the response cache (pass-through when no cache_dir).
  Completion cached_complete(const ChatRequest& request);

  /// Builds a request with the configured defaults and runs cached_complete.
  std::string ask(std::string tag, std::vector<ChatMessage> messages,
                  std::optional<double> temperature = std::nullopt);

  [[nodiscard]] const GatewayOptions& options() const { return options_; }
  [[nodiscard]] const Provider& provider() const { return *provider_; }
  [[nodiscard]] int concurrency() const { return options_.concurrency; }
  [[nodiscard]] const ResponseCache* cache() const { return cache_ ? &*cache_ : nullptr; }

  [[nodiscard]] std::uint64_t provider_calls() const { return provider_calls_.load(); }
  [[nodiscard]] std::uint64_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::shared_ptr<Provider> provider_;
  GatewayOptions options_;
  std::optional<ResponseCache> cache_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
  std::atomic<std::uint64_t> provider_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
};

}  // namespace negbias
