#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "negbias/gateway.hpp"

namespace negbias::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(NEGBIAS_FIXTURES) / name;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("negbias-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline ScriptRule reply(std::string match, std::string text) {
  return {std::move(match), std::move(text), std::nullopt};
}

inline ScriptRule choose(std::string match, std::string option) {
  return {std::move(match), std::nullopt, std::move(option)};
}

inline GatewayOptions quick_options(int concurrency = 1) {
  GatewayOptions o;
  o.model = "test-model";
  o.concurrency = concurrency;
  o.retry.base_delay = std::chrono::milliseconds(1);
  o.retry.max_delay = std::chrono::milliseconds(4);
  return o;
}

/// Tag-mode scripted gateway without a cache.
inline std::unique_ptr<Gateway> scripted(std::vector<ScriptRule> rules, int concurrency = 1) {
  return std::make_unique<Gateway>(
      std::make_shared<ScriptedProvider>(ScriptedProvider::Mode::tag, std::move(rules)),
      quick_options(concurrency));
}

/// Records every request it sees and answers with a fixed text.
class RecordingProvider final : public Provider {
 public:
  explicit RecordingProvider(std::string answer = "Answer: Yes") : answer_(std::move(answer)) {}
  [[nodiscard]] std::string id() const override { return "recording"; }
  std::string complete(const ChatRequest& request) override {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    return answer_;
  }
  std::vector<ChatRequest> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

 private:
  std::string answer_;
  mutable std::mutex mutex_;
  std::vector<ChatRequest> requests_;
};

}  // namespace negbias::testing
