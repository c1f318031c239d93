#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "synth/backend.hpp"
#include "synth/types.hpp"

namespace mgh::synth {

struct MockOptions {
  std::uint64_t seed = 0;
  // Requested document lengths are clipped to this many words.
  std::size_t max_doc_words = 12;
  // Query length hints are clipped to this many words.
  std::size_t max_query_words = 4;
  std::size_t tasks_per_reply = 20;
};

// Deterministic offline stand-in for a chat model. Replies are a pure
// function of (options, prompt text), so concurrent callers and reruns see
// identical output.
//
// Stage 2 builds the positive from W content words, the query from a subset
// of those words, and negative level k by swapping the first
// ⌈p_k·W⌉ positions of one random permutation for distractor words, with
// p = (0.15, 0.35, 0.60, 0.90). Replacement sets are nested, so overlap with
// the positive strictly decreases from level 1 to level 4.
class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(MockOptions options = {}) : options_(options) {}

  std::string complete(const ChatRequest& req) override;

  const MockOptions& options() const { return options_; }

 private:
  MockOptions options_;
};

namespace mock {

inline constexpr std::array<int, 4> kCorruptionPercent = {15, 35, 60, 90};

// Corruption rate (percent) for level k (1-based) of num_levels.
int corruption_percent(std::size_t level, std::size_t num_levels);
// ⌈percent·words/100⌉ in exact integer arithmetic.
std::size_t replaced_word_count(std::size_t words, std::size_t level, std::size_t num_levels = 4);

// Vocabularies are letter-disjoint: content words never share a consonant
// with distractor words.
std::string content_word(std::size_t index);
std::string distractor_word(std::size_t index);
std::size_t content_vocab_size();
std::size_t distractor_vocab_size();

// Applies the nested corruption to `words`, returning num_levels negatives.
std::vector<std::string> corrupt(const std::vector<std::string>& words, std::size_t num_levels,
                                 std::mt19937_64& rng);

}  // namespace mock

}  // namespace mgh::synth
