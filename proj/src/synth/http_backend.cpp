#include "synth/http_backend.hpp"

#include <cstdlib>

#include "httplib.h"

namespace mgh::synth {

HttpBackend::HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.base_url.empty()) throw ConfigError("backend.base_url is empty");
  if (cfg_.timeout_seconds <= 0) throw ConfigError("backend.timeout_seconds must be positive");
  if (!cfg_.token_env.empty()) {
    const char* tok = std::getenv(cfg_.token_env.c_str());
    if (tok == nullptr || *tok == '\0') {
      throw ConfigError("environment variable " + cfg_.token_env + " is not set");
    }
    token_ = tok;
  }
}

std::string extract_reply_content(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw BackendTransportError("reply content is not a string", false);
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendTransportError(std::string("malformed reply envelope: ") + e.what(), false);
  }
}

std::string HttpBackend::complete(const ChatRequest& req) {
  httplib::Client client(cfg_.base_url);
  client.set_connection_timeout(cfg_.timeout_seconds, 0);
  client.set_read_timeout(cfg_.timeout_seconds, 0);
  client.set_write_timeout(cfg_.timeout_seconds, 0);
  if (!token_.empty()) client.set_bearer_token_auth(token_);

  auto res = client.Post(cfg_.path, to_json(req).dump(), "application/json");
  if (!res) {
    throw BackendTransportError(cfg_.base_url + cfg_.path + ": " + httplib::to_string(res.error()),
                                true);
  }
  if (res->status == 429 || res->status >= 500) {
    throw BackendTransportError("HTTP " + std::to_string(res->status) + " from " + cfg_.base_url,
                                true);
  }
  if (res->status != 200) {
    throw BackendTransportError("HTTP " + std::to_string(res->status) + " from " + cfg_.base_url,
                                false);
  }
  return extract_reply_content(res->body);
}

}  // namespace mgh::synth
