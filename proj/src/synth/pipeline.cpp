#include "synth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <optional>
#include <set>
#include <thread>

#include "common/digest.hpp"
#include "synth/parse.hpp"
#include "synth/prompts.hpp"

namespace mgh::synth {
namespace {

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first failure
// stops further dispatch; the failure with the lowest index is rethrown.
template <typename Fn>
void run_indexed(std::size_t n, std::size_t threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || stop.load()) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        stop.store(true);
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Slot {
  std::optional<TrainingTriplet> triplet;
  std::vector<std::string> violations;
};

void tally(const Slot& slot, SynthesisReport& report) {
  ++report.requests;
  for (const auto& v : slot.violations) ++report.violations[v];
  if (!slot.violations.empty()) ++report.validation_retries;
  if (slot.triplet) {
    ++report.accepted;
  } else {
    ++report.rejected;
  }
}

template <typename Attempt>
TrainingTriplet with_retry(std::vector<std::string>* violations, Attempt&& attempt) {
  for (int round = 0;; ++round) {
    try {
      return attempt(round);
    } catch (const ValidationError& e) {
      if (violations) violations->push_back(e.violation());
      if (round >= 1) throw;
    }
  }
}

}  // namespace

std::vector<TaskSpec> brainstorm_tasks(TaskCategory category, std::size_t n,
                                       ChatBackend& backend, const GenerationOptions& opt) {
  if (n == 0) throw ContractError("brainstorm_tasks: n must be at least 1");
  const auto raw = backend.complete(
      user_request(opt.model, render_brainstorm_prompt(category), opt.temperature));
  std::vector<TaskSpec> out;
  std::set<std::string> seen;
  for (auto& line : parse_string_list(raw)) {
    if (out.size() == n) break;
    if (!seen.insert(lowercase(line)).second) continue;
    out.push_back({category, std::move(line)});
  }
  return out;
}

TrainingTriplet generate_triplet(const TaskSpec& task, const PromptPlaceholders& ph,
                                 ChatBackend& backend, std::mt19937_64& rng,
                                 const GenerationOptions& opt,
                                 std::vector<std::string>* violations) {
  validate_placeholders(ph);
  PromptPlaceholders current = ph;
  return with_retry(violations, [&](int round) {
    if (round > 0) current = sample_placeholders(rng, opt.language);
    const auto raw = backend.complete(
        user_request(opt.model, render_prompt(task, current, opt.num_levels), opt.temperature));
    TrainingTriplet t = parse_generation(raw, opt.num_levels);
    t.source = Source::synthetic;
    t.task = task;
    return t;
  });
}

TrainingTriplet augment_retrieval_pair(const TaskSpec& task, const std::string& query,
                                       const std::string& positive, ChatBackend& backend,
                                       std::mt19937_64& rng, const GenerationOptions& opt,
                                       std::vector<std::string>* violations) {
  if (query.empty() || positive.empty()) {
    throw ContractError("augment_retrieval_pair: query and positive must be non-empty");
  }
  return with_retry(violations, [&](int) {
    const auto ph = sample_placeholders(rng, opt.language);
    const auto raw = backend.complete(user_request(
        opt.model, render_augment_prompt(task, query, positive, ph, opt.num_levels),
        opt.temperature));
    TrainingTriplet t;
    t.query = query;
    t.positive = positive;
    t.negatives = parse_negatives(raw, opt.num_levels);
    t.source = Source::retrieval_augmented;
    t.task = task;
    validate_triplet(t, opt.num_levels);
    return t;
  });
}

TaskSpec default_retrieval_task() {
  return {TaskCategory::short_long, "retrieve passages for a query"};
}

void SynthConfig::validate() const {
  if (count == 0) throw ConfigError("synth.count must be at least 1");
  if (tasks_per_category == 0) throw ConfigError("synth.tasks_per_category must be at least 1");
  if (generation.num_levels == 0) throw ConfigError("num_levels must be at least 1");
  if (max_parallel == 0) throw ConfigError("synth.max_parallel must be at least 1");
  if (generation.language.empty()) throw ConfigError("synth.language must be non-empty");
  mix.validate();
}

nlohmann::json SynthesisReport::to_json() const {
  return {{"requested", requested},
          {"accepted", accepted},
          {"rejected", rejected},
          {"validation_retries", validation_retries},
          {"requests", requests},
          {"rounds", rounds},
          {"tasks_per_category", tasks_per_category},
          {"violations", violations}};
}

std::vector<TrainingTriplet> synthesize(const SynthConfig& cfg, ChatBackend& backend,
                                        SynthesisReport& report) {
  cfg.validate();
  report = {};
  report.requested = cfg.count;

  // Stage 1, then one stage-2 request per allocated slot.
  const auto alloc = cfg.mix.allocate(cfg.count);
  std::vector<TaskSpec> plan;
  for (std::size_t c = 0; c < kAllCategories.size(); ++c) {
    if (alloc[c] == 0) continue;
    const auto tasks =
        brainstorm_tasks(kAllCategories[c], cfg.tasks_per_category, backend, cfg.generation);
    if (tasks.empty()) {
      throw ValidationError("no_tasks", std::string("no tasks for ") + to_string(kAllCategories[c]));
    }
    report.tasks_per_category[to_string(kAllCategories[c])] = tasks.size();
    for (std::size_t j = 0; j < alloc[c]; ++j) plan.push_back(tasks[j % tasks.size()]);
  }
  std::mt19937_64 order_rng(mix_seed(cfg.seed, "order"));
  std::shuffle(plan.begin(), plan.end(), order_rng);

  std::vector<TrainingTriplet> out;
  std::uint64_t next_index = 0;
  while (!plan.empty() && out.size() < cfg.count && report.rounds <= cfg.max_rounds) {
    ++report.rounds;
    const std::uint64_t base = next_index;
    next_index += plan.size();
    std::vector<Slot> slots(plan.size());
    run_indexed(plan.size(), cfg.max_parallel, [&](std::size_t i) {
      std::mt19937_64 rng(mix_seed(cfg.seed, base + i));
      const auto ph = sample_placeholders(rng, cfg.generation.language);
      try {
        slots[i].triplet =
            generate_triplet(plan[i], ph, backend, rng, cfg.generation, &slots[i].violations);
      } catch (const ValidationError&) {
      }
    });
    std::vector<TaskSpec> retry;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      tally(slots[i], report);
      if (slots[i].triplet) {
        out.push_back(std::move(*slots[i].triplet));
      } else {
        retry.push_back(plan[i]);
      }
    }
    plan = std::move(retry);
  }
  if (out.empty()) throw ValidationError("no_records", "no generated example passed validation");
  return out;
}

std::vector<TrainingTriplet> augment_pairs(const std::vector<RetrievalPair>& pairs,
                                           const TaskSpec& task, const SynthConfig& cfg,
                                           ChatBackend& backend, SynthesisReport& report) {
  report = {};
  report.requested = pairs.size();
  report.rounds = 1;
  std::vector<Slot> slots(pairs.size());
  run_indexed(pairs.size(), cfg.max_parallel, [&](std::size_t i) {
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    try {
      slots[i].triplet = augment_retrieval_pair(task, pairs[i].query, pairs[i].positive, backend,
                                                rng, cfg.generation, &slots[i].violations);
    } catch (const ValidationError&) {
    }
  });
  std::vector<TrainingTriplet> out;
  for (auto& slot : slots) {
    tally(slot, report);
    if (slot.triplet) out.push_back(std::move(*slot.triplet));
  }
  return out;
}

}  // namespace mgh::synth
