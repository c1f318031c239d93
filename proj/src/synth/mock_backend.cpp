#include "synth/mock_backend.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>

#include "common/digest.hpp"
#include "json.hpp"
#include "synth/prompts.hpp"

namespace mgh::synth {
namespace mock {
namespace {

constexpr std::string_view kContentConsonants = "bdfgklmnprst";
constexpr std::string_view kDistractorConsonants = "chjqvwxyz";
constexpr std::string_view kVowels = "aeiou";

std::string syllable_word(std::size_t index, std::string_view consonants) {
  const std::size_t syllables = consonants.size() * kVowels.size();
  auto syl = [&](std::size_t s) {
    return std::string{consonants[s / kVowels.size()], kVowels[s % kVowels.size()]};
  };
  return syl((index / syllables) % syllables) + syl(index % syllables);
}

}  // namespace

int corruption_percent(std::size_t level, std::size_t num_levels) {
  if (num_levels == kCorruptionPercent.size()) return kCorruptionPercent.at(level - 1);
  if (num_levels <= 1) return kCorruptionPercent.front();
  const int lo = kCorruptionPercent.front(), hi = kCorruptionPercent.back();
  return lo + static_cast<int>((hi - lo) * (level - 1) / (num_levels - 1));
}

std::size_t replaced_word_count(std::size_t words, std::size_t level, std::size_t num_levels) {
  const auto pct = static_cast<std::size_t>(corruption_percent(level, num_levels));
  return (pct * words + 99) / 100;
}

std::string content_word(std::size_t index) { return syllable_word(index, kContentConsonants); }
std::string distractor_word(std::size_t index) { return syllable_word(index, kDistractorConsonants); }

std::size_t content_vocab_size() {
  const std::size_t s = kContentConsonants.size() * kVowels.size();
  return s * s;
}

std::size_t distractor_vocab_size() {
  const std::size_t s = kDistractorConsonants.size() * kVowels.size();
  return s * s;
}

std::vector<std::string> corrupt(const std::vector<std::string>& words, std::size_t num_levels,
                                 std::mt19937_64& rng) {
  std::vector<std::string> base = words;
  std::uniform_int_distribution<std::size_t> content(0, content_vocab_size() - 1);
  while (base.size() < num_levels) base.push_back(content_word(content(rng)));
  const std::size_t w = base.size();

  std::vector<std::size_t> order(w);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<std::size_t> distract(0, distractor_vocab_size() - 1);
  std::vector<std::string> replacement(w);
  for (auto& r : replacement) r = distractor_word(distract(rng));

  std::vector<std::string> out;
  std::size_t prev = 0;
  for (std::size_t k = 1; k <= num_levels; ++k) {
    std::size_t count = std::max(replaced_word_count(w, k, num_levels), prev + 1);
    count = std::min(count, w);
    prev = count;
    std::vector<std::string> neg = base;
    for (std::size_t i = 0; i < count; ++i) neg[order[i]] = replacement[order[i]];
    std::string text;
    for (std::size_t i = 0; i < neg.size(); ++i) {
      if (i) text.push_back(' ');
      text += neg[i];
    }
    out.push_back(std::move(text));
  }
  return out;
}

}  // namespace mock

namespace {

constexpr std::array<std::string_view, 5> kVerbs = {"find", "fetch", "match", "rank", "pick"};
constexpr std::array<std::string_view, 12> kTopics = {
    "travel", "finance", "health", "cooking", "law",    "sports",
    "music",  "physics", "history", "garden", "retail", "software"};

std::string task_phrase(TaskCategory c, std::string_view verb, std::string_view topic,
                        std::size_t noun_index) {
  static constexpr std::array<std::array<std::string_view, 6>, 5> kNouns = {{
      {"guides", "manuals", "reports", "articles", "reviews", "answers"},
      {"titles", "labels", "tags", "headlines", "summaries", "topics"},
      {"papers", "essays", "filings", "briefs", "studies", "chapters"},
      {"questions", "phrases", "titles", "queries", "terms", "names"},
      {"sentences", "claims", "questions", "remarks", "statements", "quotes"},
  }};
  const auto noun = std::string(kNouns[static_cast<std::size_t>(c)][noun_index]);
  const auto v = std::string(verb), t = std::string(topic);
  switch (c) {
    case TaskCategory::short_long: return v + " " + noun + " on " + t;
    case TaskCategory::long_short: return v + " " + noun + " for " + t + " texts";
    case TaskCategory::long_long: return v + " related " + t + " " + noun;
    case TaskCategory::short_short: return v + " similar " + t + " " + noun;
    case TaskCategory::sts: return v + " paraphrased " + t + " " + noun;
  }
  return v;
}

std::string brainstorm_reply(TaskCategory c, const MockOptions& o) {
  std::mt19937_64 rng(mix_seed(o.seed, std::string("brainstorm:") + to_string(c)));
  const std::size_t combos = kVerbs.size() * kTopics.size() * 6;
  std::vector<std::size_t> idx(combos);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n = std::min(o.tasks_per_reply, combos);
  const bool python_quotes = (rng() & 1u) != 0;
  std::string out = "[";
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = idx[i];
    const auto phrase = task_phrase(c, kVerbs[x % kVerbs.size()],
                                    kTopics[(x / kVerbs.size()) % kTopics.size()],
                                    x / (kVerbs.size() * kTopics.size()));
    if (i) out += ", ";
    const char q = python_quotes ? '\'' : '"';
    out += q + phrase + q;
  }
  return out + "]";
}

std::size_t find_number_after(std::string_view text, std::string_view prefix, std::size_t fallback) {
  const auto pos = text.find(prefix);
  if (pos == std::string_view::npos) return fallback;
  std::size_t i = pos + prefix.size(), v = 0;
  bool any = false;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    v = v * 10 + static_cast<std::size_t>(text[i++] - '0');
    any = true;
  }
  return any ? v : fallback;
}

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::size_t query_words_hint(std::string_view prompt) {
  if (prompt.find("less than 5 words") != std::string_view::npos) return 3;
  if (prompt.find("5 to 15 words") != std::string_view::npos) return 5;
  if (prompt.find("at least 10 words") != std::string_view::npos) return 10;
  return 3;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s.push_back(' ');
    s += words[i];
  }
  return s;
}

nlohmann::json negatives_json(const std::vector<std::string>& negatives) {
  const auto tags = level_tags(negatives.size());
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    list.push_back({{"similarity_level", tags[k]}, {"text", negatives[k]}});
  }
  return list;
}

std::string maybe_fence(const std::string& body, std::mt19937_64& rng) {
  if ((rng() & 1u) != 0) return "```json\n" + body + "\n```";
  return body;
}

std::string generation_reply(std::string_view prompt, const MockOptions& o) {
  std::mt19937_64 rng(mix_seed(o.seed, prompt));
  const std::size_t levels = std::max<std::size_t>(1, count_occurrences(prompt, "\"similarity_level\""));
  const std::size_t requested = find_number_after(prompt, "documents should be at least ", 50);
  const std::size_t w = std::max(levels, std::min(requested, o.max_doc_words));

  std::uniform_int_distribution<std::size_t> content(0, mock::content_vocab_size() - 1);
  std::vector<std::string> words(w);
  std::set<std::string> used;
  for (auto& word : words) {
    do {
      word = mock::content_word(content(rng));
    } while (!used.insert(word).second);
  }
  const std::size_t q_words =
      std::max<std::size_t>(1, std::min({query_words_hint(prompt), o.max_query_words, w - 1}));
  std::vector<std::size_t> pos(w);
  std::iota(pos.begin(), pos.end(), 0);
  std::shuffle(pos.begin(), pos.end(), rng);
  pos.resize(q_words);
  std::sort(pos.begin(), pos.end());
  std::vector<std::string> query;
  for (auto p : pos) query.push_back(words[p]);

  nlohmann::json obj;
  obj["user_query"] = join(query);
  obj["positive_document"] = join(words);
  obj["hard_negative_document"] = negatives_json(mock::corrupt(words, levels, rng));
  return maybe_fence(obj.dump(2), rng);
}

std::string augment_reply(std::string_view prompt, const MockOptions& o) {
  const auto intro = prompt.find(kAugmentExampleIntro);
  const auto line_start = prompt.find('\n', intro) + 1;
  const auto line_end = prompt.find('\n', line_start);
  nlohmann::json example;
  try {
    example = nlohmann::json::parse(prompt.substr(line_start, line_end - line_start));
  } catch (const nlohmann::json::exception&) {
    return "I could not read the example.";
  }
  const std::string positive = example.value("positive_document", "");
  std::vector<std::string> words;
  std::istringstream ss(positive);
  for (std::string word; ss >> word;) words.push_back(word);

  std::mt19937_64 rng(mix_seed(o.seed, prompt));
  const std::size_t levels = std::max<std::size_t>(1, count_occurrences(prompt, "\"similarity_level\""));
  nlohmann::json obj;
  obj["hard_negative_document"] = negatives_json(mock::corrupt(words, levels, rng));
  return maybe_fence(obj.dump(2), rng);
}

}  // namespace

std::string MockBackend::complete(const ChatRequest& req) {
  if (req.messages.empty()) return "";
  const std::string& prompt = req.messages.back().content;
  for (auto c : kAllCategories) {
    if (prompt == render_brainstorm_prompt(c)) return brainstorm_reply(c, options_);
  }
  if (prompt.starts_with(kStage2Opening)) {
    if (prompt.find(kAugmentExampleIntro) != std::string::npos) return augment_reply(prompt, options_);
    return generation_reply(prompt, options_);
  }
  return "Sorry, I can only help with embedding data generation.";
}

}  // namespace mgh::synth
