#include "synth/backend.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace mgh::synth {

nlohmann::json to_json(const ChatRequest& req) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", req.model}, {"messages", messages}, {"temperature", req.temperature}};
}

ChatRequest user_request(std::string model, std::string prompt, double temperature) {
  ChatRequest req;
  req.model = std::move(model);
  req.messages.push_back({"user", std::move(prompt)});
  req.temperature = temperature;
  return req;
}

ResilientBackend::ResilientBackend(ChatBackend& inner, RetryPolicy policy,
                                   std::size_t max_parallel, std::uint64_t jitter_seed,
                                   Sleeper sleeper)
    : inner_(inner),
      policy_(policy),
      max_parallel_(max_parallel),
      sleeper_(std::move(sleeper)),
      jitter_rng_(jitter_seed) {
  if (max_parallel_ == 0) throw ConfigError("max_parallel must be at least 1");
  if (policy_.max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (!(policy_.jitter >= 0.0 && policy_.jitter <= 1.0)) throw ConfigError("jitter must be in [0, 1]");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void ResilientBackend::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < max_parallel_; });
  ++in_flight_;
  stats_.max_in_flight = std::max(stats_.max_in_flight, in_flight_);
}

void ResilientBackend::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

std::chrono::milliseconds ResilientBackend::backoff(int retry) {
  const double base = std::min(
      static_cast<double>(policy_.max_backoff.count()),
      static_cast<double>(policy_.initial_backoff.count()) * std::pow(policy_.multiplier, retry));
  double u;
  {
    std::lock_guard lock(mu_);
    u = std::uniform_real_distribution<double>(0.0, 1.0)(jitter_rng_);
  }
  const double delay = base * (1.0 - policy_.jitter * u);
  return std::chrono::milliseconds(static_cast<long long>(std::llround(delay)));
}

std::string ResilientBackend::complete(const ChatRequest& req) {
  for (int attempt = 0;; ++attempt) {
    acquire();
    {
      std::lock_guard lock(mu_);
      ++stats_.attempts;
    }
    try {
      std::string reply = inner_.complete(req);
      release();
      return reply;
    } catch (const TransportError& e) {
      release();
      const auto* typed = dynamic_cast<const BackendTransportError*>(&e);
      const bool retryable = typed == nullptr || typed->retryable();
      if (!retryable || attempt >= policy_.max_retries) {
        std::lock_guard lock(mu_);
        ++stats_.failures;
        if (attempt == 0 || !retryable) throw;
        throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempt) +
                             " retries)");
      }
      {
        std::lock_guard lock(mu_);
        ++stats_.retries;
      }
      sleeper_(backoff(attempt));
    } catch (...) {
      release();
      throw;
    }
  }
}

ResilientBackend::Stats ResilientBackend::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace mgh::synth
