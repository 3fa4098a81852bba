#include "negbias/gateway.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "negbias/errors.hpp"
#include "negbias/jsonl.hpp"
#include "negbias/text.hpp"

namespace negbias {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "?";
}

void validate(const ChatRequest& request) {
  if (request.temperature < 0.0) throw std::invalid_argument("temperature must be >= 0");
  if (request.max_tokens <= 0) throw std::invalid_argument("max_tokens must be > 0");
  bool has_user = false;
  for (const auto& m : request.messages) {
    if (m.role == Role::user) has_user = true;
    if (m.role != Role::system && m.content.empty()) {
      throw std::invalid_argument("empty message content");
    }
  }
  if (!has_user) throw std::invalid_argument("request has no user message");
}

namespace {

jsonl::Json messages_json(const ChatRequest& request) {
  auto messages = jsonl::Json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  return messages;
}

}  // namespace

std::string request_body(const ChatRequest& request) {
  jsonl::Json body{{"model", request.model},
                   {"messages", messages_json(request)},
                   {"temperature", request.temperature},
                   {"max_tokens", request.max_tokens}};
  return body.dump();
}

std::string CacheKey::hex() const {
  std::string out;
  out.reserve(64);
  for (auto b : digest) out += fmt::format("{:02x}", b);
  return out;
}

CacheKey make_cache_key(std::string_view provider_id, const ChatRequest& request) {
  const jsonl::Json canonical{{"provider", provider_id},
                              {"model", request.model},
                              {"messages", messages_json(request)},
                              {"temperature", request.temperature},
                              {"max_tokens", request.max_tokens},
                              {"tag", request.tag}};
  const std::string bytes = canonical.dump();

  CacheKey key;
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), key.digest.data(), &len, EVP_sha256(), nullptr) !=
          1 ||
      len != key.digest.size()) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return key;
}

// ---------------------------------------------------------------------------
// ScriptedProvider

ScriptedProvider::ScriptedProvider(Mode mode, std::vector<ScriptRule> rules,
                                   std::string identity)
    : mode_(mode), rules_(std::move(rules)), identity_(std::move(identity)) {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& r = rules_[i];
    if (r.response.has_value() == r.choose.has_value()) {
      throw InputError("scripted rule '" + r.match + "' needs exactly one of response/choose");
    }
    if (mode_ == Mode::tag && r.match.find('*') != std::string::npos) {
      globs_.push_back(i);
    } else {
      exact_.try_emplace(r.match, i);
    }
  }
}

ScriptedProvider ScriptedProvider::from_file(const std::filesystem::path& path) {
  const std::string raw = jsonl::read_text(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw InputError(path.string() + ": expected a JSON object");

  Mode mode = Mode::tag;
  if (auto it = j.find("mode"); it != j.end()) {
    if (*it == "strict") {
      mode = Mode::strict;
    } else if (*it != "tag") {
      throw InputError(path.string() + ": mode must be \"tag\" or \"strict\"");
    }
  }

  std::vector<ScriptRule> rules;
  if (auto it = j.find("rules"); it != j.end()) {
    for (const auto& r : *it) {
      ScriptRule rule;
      rule.match = r.at("match").get<std::string>();
      if (r.contains("response")) rule.response = r.at("response").get<std::string>();
      if (r.contains("choose")) rule.choose = r.at("choose").get<std::string>();
      rules.push_back(std::move(rule));
    }
  }
  if (auto it = j.find("responses"); it != j.end()) {
    for (const auto& [key, value] : it->items()) {
      rules.push_back({key, value.get<std::string>(), std::nullopt});
    }
  }

  // Identity covers the script contents so edited scripts never hit stale cache entries.
  const auto key = make_cache_key("scripted-file", ChatRequest{"", {{Role::user, raw}}, 0, 1, ""});
  return ScriptedProvider(mode, std::move(rules), "scripted:" + key.hex().substr(0, 16));
}

std::string ScriptedProvider::strict_key(const ChatRequest& request) {
  std::string key;
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    if (i > 0) key += '\n';
    key += to_string(request.messages[i].role);
    key += ": ";
    key += request.messages[i].content;
  }
  return key;
}

namespace {

/// Letter X such that "(X) <option>" appears as a complete option in the text.
std::optional<char> find_option_letter(std::string_view text, std::string_view option) {
  for (std::size_t pos = text.find('('); pos != std::string_view::npos;
       pos = text.find('(', pos + 1)) {
    if (pos + 4 > text.size()) break;
    const char letter = text[pos + 1];
    if (letter < 'A' || letter > 'Z' || text[pos + 2] != ')' || text[pos + 3] != ' ') continue;
    const auto body = text.substr(pos + 4);
    if (body.substr(0, option.size()) != option) continue;
    const auto rest = body.substr(option.size());
    if (rest.empty() || rest.front() == '\n' || rest.substr(0, 2) == " (") return letter;
  }
  return std::nullopt;
}

}  // namespace

std::string ScriptedProvider::complete(const ChatRequest& request) {
  const std::string key = mode_ == Mode::tag ? request.tag : strict_key(request);

  const ScriptRule* rule = nullptr;
  if (auto it = exact_.find(key); it != exact_.end()) {
    rule = &rules_[it->second];
  } else {
    for (auto i : globs_) {
      if (text::glob_match(rules_[i].match, key)) {
        rule = &rules_[i];
        break;
      }
    }
  }
  if (rule == nullptr) throw ProviderError(404, "no scripted response for '" + key + "'");
  if (rule->response) return *rule->response;

  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (auto letter = find_option_letter(it->content, *rule->choose)) {
      return fmt::format("Answer: ({})", *letter);
    }
  }
  throw ProviderError(404, "scripted choice '" + *rule->choose + "' not among the options");
}

// ---------------------------------------------------------------------------
// Retry, cache, gateway

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  // attempt is 1-based; no delay before the first try.
  if (attempt <= 1) return std::chrono::milliseconds{0};
  const double scaled =
      static_cast<double>(base_delay.count()) * std::pow(multiplier, attempt - 2);
  return std::chrono::milliseconds{
      static_cast<std::int64_t>(std::min(scaled, static_cast<double>(max_delay.count())))};
}

bool is_transient(const std::exception& e) {
  const auto* pe = dynamic_cast<const ProviderError*>(&e);
  if (pe == nullptr) return false;
  const int s = pe->status();
  return s == 0 || s == 408 || s == 429 || (s >= 500 && s <= 599);
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw CacheIoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::optional<std::string> ResponseCache::get(const CacheKey& key) const {
  const auto path = dir_ / key.hex();
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw CacheIoError("cannot read " + path.string());
  return ss.str();
}

void ResponseCache::put(const CacheKey& key, const std::string& text) const {
  const auto path = dir_ / key.hex();
  // Unique temp name per writer; rename makes the final file appear atomically.
  auto tmp = path;
  tmp += fmt::format(".{}.tmp", std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw CacheIoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CacheIoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

void ResponseCache::clear() const {
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir_, ec)) {
    std::filesystem::remove(entry.path(), ec);
  }
  if (ec) throw CacheIoError("cannot clear " + dir_.string() + ": " + ec.message());
}

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayOptions options)
    : provider_(std::move(provider)), options_(std::move(options)) {
  if (!provider_) throw std::invalid_argument("gateway needs a provider");
  if (options_.concurrency < 1) throw std::invalid_argument("concurrency must be >= 1");
  if (options_.retry.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (options_.cache_dir) cache_.emplace(*options_.cache_dir);
  in_flight_ = std::make_unique<std::counting_semaphore<>>(options_.concurrency);
}

std::string Gateway::complete(const ChatRequest& request) {
  validate(request);
  for (int attempt = 1;; ++attempt) {
    std::this_thread::sleep_for(options_.retry.delay_before(attempt));
    try {
      in_flight_->acquire();
      struct Release {
        std::counting_semaphore<>* sem;
        ~Release() { sem->release(); }
      } release{in_flight_.get()};
      ++provider_calls_;
      return provider_->complete(request);
    } catch (const ProviderError& e) {
      if (!is_transient(e) || attempt >= options_.retry.max_attempts) throw;
      spdlog::warn("{}: attempt {} failed ({}); retrying", request.tag, attempt, e.what());
    }
  }
}

Completion Gateway::cached_complete(const ChatRequest& request) {
  if (!cache_) return {complete(request), false};
  const auto key = make_cache_key(provider_->id(), request);
  if (auto hit = cache_->get(key)) {
    ++cache_hits_;
    return {std::move(*hit), true};
  }
  std::string text = complete(request);
  cache_->put(key, text);
  return {std::move(text), false};
}

std::string Gateway::ask(std::string tag, std::vector<ChatMessage> messages,
                         std::optional<double> temperature) {
  ChatRequest request{options_.model, std::move(messages),
                      temperature.value_or(options_.temperature), options_.max_tokens,
                      std::move(tag)};
  return cached_complete(request).text;
}

}  // namespace negbias
