#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "common/errors.hpp"
#include "json.hpp"

namespace mgh::synth {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
};

// Request body: {model, messages:[{role, content}], temperature}.
nlohmann::json to_json(const ChatRequest& req);
ChatRequest user_request(std::string model, std::string prompt, double temperature);

// Thrown by backends for failures of the exchange itself. Non-retryable
// failures (bad credentials, malformed envelopes) skip the retry loop.
class BackendTransportError : public TransportError {
 public:
  BackendTransportError(const std::string& m, bool retryable)
      : TransportError(m), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

// Returns the content of the first reply choice. Must be safe to call from
// several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& req) = 0;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{250};
  std::chrono::milliseconds max_backoff{8000};
  double multiplier = 2.0;
  // Delay is drawn uniformly from [(1 − jitter)·base, base].
  double jitter = 0.5;
};

// Decorates a backend with exponential-backoff retries and a bound on the
// number of requests in flight.
class ResilientBackend : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  struct Stats {
    std::size_t attempts = 0;
    std::size_t retries = 0;
    std::size_t failures = 0;
    std::size_t max_in_flight = 0;
  };

  ResilientBackend(ChatBackend& inner, RetryPolicy policy, std::size_t max_parallel,
                   std::uint64_t jitter_seed = 0, Sleeper sleeper = {});

  std::string complete(const ChatRequest& req) override;

  Stats stats() const;
  std::size_t max_parallel() const { return max_parallel_; }

  // Backoff before retry number `retry` (0-based), including jitter.
  std::chrono::milliseconds backoff(int retry);

 private:
  void acquire();
  void release();

  ChatBackend& inner_;
  RetryPolicy policy_;
  std::size_t max_parallel_;
  Sleeper sleeper_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  Stats stats_;
  std::mt19937_64 jitter_rng_;
};

}  // namespace mgh::synth
