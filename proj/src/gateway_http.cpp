#include "httplib.h"

#include "negbias/errors.hpp"
#include "negbias/gateway.hpp"
#include "negbias/jsonl.hpp"

namespace negbias {

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw InputError("provider url must start with http:// or https://: " + config_.base_url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
}

std::string HttpProvider::id() const { return "http:" + scheme_host_port_ + path_prefix_; }

std::string HttpProvider::complete(const ChatRequest& request) {
  // httplib::Client is not thread-safe; one per call keeps the provider shareable.
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, request_body(request),
                         "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      throw Timeout(httplib::to_string(err));
    }
    throw ProviderError(0, httplib::to_string(err));
  }
  if (res->status != 200) throw ProviderError(res->status, res->body);

  try {
    const auto body = nlohmann::json::parse(res->body);
    const auto& content = body.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ProviderError(res->status, "content is not a string");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(res->status, std::string("unexpected response shape: ") + e.what());
  }
}

}  // namespace negbias
