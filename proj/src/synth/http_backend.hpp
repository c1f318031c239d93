#pragma once

#include <string>

#include "synth/backend.hpp"

namespace mgh::synth {

struct HttpBackendConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  // Environment variable holding the bearer token; empty disables auth.
  std::string token_env = "MGH_API_TOKEN";
  int timeout_seconds = 60;
};

// OpenAI-style chat completion over HTTP(S). Each call opens its own client,
// so concurrent callers share nothing.
class HttpBackend : public ChatBackend {
 public:
  // Throws ConfigError for an empty base URL or an unset token variable.
  explicit HttpBackend(HttpBackendConfig cfg);

  std::string complete(const ChatRequest& req) override;

 private:
  HttpBackendConfig cfg_;
  std::string token_;
};

// Reply body -> choices[0].message.content. Throws a non-retryable
// BackendTransportError when the envelope is malformed.
std::string extract_reply_content(const std::string& body);

}  // namespace mgh::synth
