#include "datastore/datastore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "common/digest.hpp"
#include "common/errors.hpp"

namespace mgh::data {
namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError("missing_field", std::string("no '") + key + "' field");
  return *it;
}

std::string string_field(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw ValidationError("field_type", std::string("'") + key + "' is not a string");
  return v.get<std::string>();
}

template <typename Parse>
void read_lines(const std::filesystem::path& path, bool strict, ReadReport& report, Parse&& parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path.string(), "cannot open dataset");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++report.lines;
    try {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError("not_json", e.what());
      }
      if (!j.is_object()) throw ValidationError("not_json", "line is not an object");
      parse(j);
      ++report.accepted;
    } catch (const ValidationError& e) {
      if (strict) {
        throw ValidationError(e.violation(), path.string() + " line " + std::to_string(number) +
                                                 ": " + e.what());
      }
      ++report.violations[e.violation()];
      report.bad_lines.push_back(number);
    }
  }
  if (in.bad()) throw FileError(path.string(), "read failed");
}

// Next source under weighted round-robin: smallest (taken + 1) / weight among
// sources with records left; ties go to the lower index.
std::vector<TrainingTriplet> interleave(std::vector<std::vector<TrainingTriplet>> parts,
                                        const std::vector<double>& weights) {
  std::vector<std::size_t> taken(parts.size(), 0);
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<TrainingTriplet> out;
  out.reserve(total);
  while (out.size() < total) {
    std::size_t best = parts.size();
    double best_key = 0.0;
    for (std::size_t s = 0; s < parts.size(); ++s) {
      if (taken[s] >= parts[s].size()) continue;
      const double key = static_cast<double>(taken[s] + 1) / weights[s];
      if (best == parts.size() || key < best_key) {
        best = s;
        best_key = key;
      }
    }
    out.push_back(std::move(parts[best][taken[best]++]));
  }
  return out;
}

}  // namespace

nlohmann::ordered_json to_record(const TrainingTriplet& t) {
  const auto tags = synth::level_tags(t.negatives.size());
  nlohmann::ordered_json negatives = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < t.negatives.size(); ++k) {
    nlohmann::ordered_json n;
    n["similarity_level"] = tags[k];
    n["text"] = t.negatives[k];
    negatives.push_back(std::move(n));
  }
  nlohmann::ordered_json j;
  j["user_query"] = t.query;
  j["positive_document"] = t.positive;
  j["hard_negative_document"] = negatives;
  j["source"] = synth::to_string(t.source);
  j["task_category"] = synth::to_string(t.task.category);
  j["task_description"] = t.task.description;
  return j;
}

TrainingTriplet from_record(const nlohmann::json& j, std::size_t num_levels) {
  TrainingTriplet t;
  t.query = string_field(j, "user_query");
  t.positive = string_field(j, "positive_document");
  const auto& list = field(j, "hard_negative_document");
  if (!list.is_array()) throw ValidationError("field_type", "'hard_negative_document' is not a list");
  if (list.size() != num_levels) {
    throw ValidationError("negative_count", "expected " + std::to_string(num_levels) +
                                                " negatives, got " + std::to_string(list.size()));
  }
  const auto tags = synth::level_tags(num_levels);
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (!list[k].is_object()) throw ValidationError("field_type", "negative is not an object");
    const auto tag = string_field(list[k], "similarity_level");
    if (tag != tags[k]) {
      throw ValidationError("level_order", "negative " + std::to_string(k + 1) + " tagged '" +
                                               tag + "', expected '" + tags[k] + "'");
    }
    t.negatives.push_back(string_field(list[k], "text"));
  }
  t.source = synth::parse_source(string_field(j, "source"));
  const auto category = string_field(j, "task_category");
  try {
    t.task.category = synth::parse_category(category);
  } catch (const ConfigError&) {
    throw ValidationError("task_category", "unknown category '" + category + "'");
  }
  if (j.contains("task_description")) t.task.description = string_field(j, "task_description");
  synth::validate_triplet(t, num_levels);
  return t;
}

std::size_t write_dataset(const std::vector<TrainingTriplet>& triplets,
                          const std::filesystem::path& path) {
  for (const auto& t : triplets) synth::validate_triplet(t, t.negatives.size());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(path.string(), "cannot open dataset for writing");
  for (const auto& t : triplets) out << to_record(t).dump() << '\n';
  out.flush();
  if (!out) throw FileError(path.string(), "write failed");
  return triplets.size();
}

nlohmann::json ReadReport::to_json() const {
  return {{"lines", lines}, {"accepted", accepted}, {"violations", violations},
          {"bad_lines", bad_lines}};
}

ReadResult read_dataset(const std::filesystem::path& path, bool strict, std::size_t num_levels) {
  ReadResult r;
  read_lines(path, strict, r.report,
             [&](const nlohmann::json& j) { r.triplets.push_back(from_record(j, num_levels)); });
  return r;
}

PairReadResult read_pairs(const std::filesystem::path& path, bool strict) {
  PairReadResult r;
  read_lines(path, strict, r.report, [&](const nlohmann::json& j) {
    synth::RetrievalPair p{string_field(j, "query"), string_field(j, "positive")};
    if (p.query.empty() || p.positive.empty()) throw ValidationError("empty_text", "empty pair text");
    r.pairs.push_back(std::move(p));
  });
  return r;
}

void MixSpec::validate() const {
  if (inputs.empty()) throw ConfigError("mix: no inputs");
  for (const auto& in : inputs) {
    if (!(in.weight > 0.0) || !std::isfinite(in.weight)) {
      throw ConfigError("mix: weight for " + in.path.string() + " must be positive");
    }
  }
  if (train_fraction < 0.0 || eval_fraction < 0.0 ||
      std::abs(train_fraction + eval_fraction - 1.0) > 1e-9) {
    throw ConfigError("mix: train and eval fractions must be non-negative and sum to 1");
  }
}

Split mix_and_split(const MixSpec& spec) {
  spec.validate();
  std::vector<std::pair<std::vector<TrainingTriplet>, double>> sources;
  for (const auto& in : spec.inputs) {
    sources.emplace_back(read_dataset(in.path, true, spec.num_levels).triplets, in.weight);
  }
  return mix_and_split(sources, spec.seed, spec.eval_fraction);
}

Split mix_and_split(const std::vector<std::pair<std::vector<TrainingTriplet>, double>>& sources,
                    std::uint64_t seed, double eval_fraction) {
  if (sources.empty()) throw ConfigError("mix: no inputs");
  if (!(eval_fraction >= 0.0 && eval_fraction <= 1.0)) throw ConfigError("mix: eval fraction out of range");
  std::size_t total = 0;
  std::vector<double> weights;
  for (const auto& [records, w] : sources) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("mix: weights must be positive");
    total += records.size();
    weights.push_back(w);
  }
  if (total == 0) throw ConfigError("mix: inputs hold no records");

  // Eval share per source by largest remainder.
  const auto eval_total = static_cast<std::size_t>(std::llround(static_cast<double>(total) * eval_fraction));
  std::vector<std::size_t> eval_n(sources.size());
  std::vector<double> rem(sources.size());
  std::size_t used = 0;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const double exact = static_cast<double>(eval_total) * static_cast<double>(sources[s].first.size()) /
                         static_cast<double>(total);
    eval_n[s] = static_cast<std::size_t>(std::floor(exact));
    rem[s] = exact - static_cast<double>(eval_n[s]);
    used += eval_n[s];
  }
  std::vector<std::size_t> order(sources.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; used < eval_total; i = (i + 1) % order.size()) {
    const std::size_t s = order[i];
    if (eval_n[s] < sources[s].first.size()) {
      ++eval_n[s];
      ++used;
    }
  }

  std::vector<std::vector<TrainingTriplet>> train_parts, eval_parts;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    auto records = sources[s].first;
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(s)));
    std::shuffle(records.begin(), records.end(), rng);
    const auto cut = records.begin() + static_cast<std::ptrdiff_t>(eval_n[s]);
    eval_parts.emplace_back(records.begin(), cut);
    train_parts.emplace_back(cut, records.end());
  }
  return {interleave(std::move(train_parts), weights), interleave(std::move(eval_parts), weights)};
}

std::string dataset_digest(const std::vector<TrainingTriplet>& triplets) {
  std::string blob;
  for (const auto& t : triplets) {
    blob += to_record(t).dump();
    blob.push_back('\n');
  }
  return sha256_hex(blob);
}

}  // namespace mgh::data
