#include "app/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "common/digest.hpp"
#include "common/errors.hpp"

namespace mgh::app {
namespace {

void reject_unknown(const nlohmann::json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

const nlohmann::json& section(const nlohmann::json& j, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  auto it = j.find(key);
  return it == j.end() ? empty : *it;
}

}  // namespace

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  nlohmann::json* node = &j;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty segment");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override key '" + key + "' crosses a non-object");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = nlohmann::json::object();
  }
  if (!node->is_object()) throw ConfigError("override key '" + key + "' crosses a non-object");
  (*node)[parts.back()] = value;
}

RunConfig parse_run_config(nlohmann::json j, const std::vector<std::string>& overrides) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& o : overrides) apply_override(j, o);
  reject_unknown(j, "config", {"schema_version", "seed", "output_dir", "backend", "mock", "synth",
                               "augment", "data", "train", "eval"});
  if (!j.contains("schema_version")) throw ConfigError("config lacks schema_version");
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + j["schema_version"].dump() + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
  RunConfig c;
  read(j, "seed", c.seed, "config");
  std::string out_dir = c.output_dir.string();
  read(j, "output_dir", out_dir, "config");
  if (out_dir.empty()) throw ConfigError("config.output_dir is empty");
  c.output_dir = out_dir;

  {
    const auto& b = section(j, "backend");
    reject_unknown(b, "backend",
                   {"kind", "base_url", "path", "token_env", "model", "temperature",
                    "timeout_seconds", "max_retries", "initial_backoff_ms", "max_backoff_ms",
                    "max_parallel"});
    read(b, "kind", c.backend.kind, "backend");
    if (c.backend.kind != "mock" && c.backend.kind != "http") {
      throw ConfigError("backend.kind must be 'mock' or 'http'");
    }
    read(b, "base_url", c.backend.http.base_url, "backend");
    read(b, "path", c.backend.http.path, "backend");
    read(b, "token_env", c.backend.http.token_env, "backend");
    read(b, "timeout_seconds", c.backend.http.timeout_seconds, "backend");
    read(b, "model", c.synth.generation.model, "backend");
    read(b, "temperature", c.synth.generation.temperature, "backend");
    read(b, "max_retries", c.backend.retry.max_retries, "backend");
    long long init_ms = c.backend.retry.initial_backoff.count();
    long long max_ms = c.backend.retry.max_backoff.count();
    read(b, "initial_backoff_ms", init_ms, "backend");
    read(b, "max_backoff_ms", max_ms, "backend");
    if (init_ms < 0 || max_ms < init_ms) throw ConfigError("backend backoff bounds are inconsistent");
    c.backend.retry.initial_backoff = std::chrono::milliseconds(init_ms);
    c.backend.retry.max_backoff = std::chrono::milliseconds(max_ms);
    read(b, "max_parallel", c.backend.max_parallel, "backend");
    if (c.backend.max_parallel == 0) throw ConfigError("backend.max_parallel must be at least 1");
    if (c.backend.retry.max_retries < 0) throw ConfigError("backend.max_retries must be >= 0");
  }
  {
    const auto& m = section(j, "mock");
    reject_unknown(m, "mock", {"max_doc_words", "max_query_words", "tasks_per_reply"});
    read(m, "max_doc_words", c.mock.max_doc_words, "mock");
    read(m, "max_query_words", c.mock.max_query_words, "mock");
    read(m, "tasks_per_reply", c.mock.tasks_per_reply, "mock");
    if (c.mock.max_doc_words == 0 || c.mock.max_query_words == 0) {
      throw ConfigError("mock word limits must be positive");
    }
  }
  {
    const auto& s = section(j, "synth");
    reject_unknown(s, "synth", {"count", "category_mix", "tasks_per_category", "language",
                                "num_levels", "max_rounds", "output"});
    read(s, "count", c.synth.count, "synth");
    read(s, "tasks_per_category", c.synth.tasks_per_category, "synth");
    read(s, "language", c.synth.generation.language, "synth");
    read(s, "num_levels", c.synth.generation.num_levels, "synth");
    read(s, "max_rounds", c.synth.max_rounds, "synth");
    read(s, "output", c.synth_output, "synth");
    if (s.contains("category_mix")) {
      const auto& mix = s["category_mix"];
      reject_unknown(mix, "synth.category_mix",
                     {"short_long", "long_short", "long_long", "short_short", "sts"});
      for (std::size_t i = 0; i < synth::kAllCategories.size(); ++i) {
        read(mix, synth::to_string(synth::kAllCategories[i]), c.synth.mix.weights[i],
             "synth.category_mix");
      }
      c.synth.mix.validate();
    }
    c.synth.max_parallel = c.backend.max_parallel;
  }
  {
    const auto& a = section(j, "augment");
    reject_unknown(a, "augment", {"pairs", "strict", "task", "output"});
    read(a, "pairs", c.augment.pairs, "augment");
    read(a, "strict", c.augment.strict, "augment");
    read(a, "task", c.augment.task, "augment");
    read(a, "output", c.augment.output, "augment");
    if (c.augment.task.empty()) throw ConfigError("augment.task is empty");
  }
  {
    const auto& d = section(j, "data");
    reject_unknown(d, "data", {"inputs", "eval_fraction"});
    read(d, "eval_fraction", c.data.eval_fraction, "data");
    if (!(c.data.eval_fraction >= 0.0 && c.data.eval_fraction < 1.0)) {
      throw ConfigError("data.eval_fraction must be in [0, 1)");
    }
    if (d.contains("inputs")) {
      if (!d["inputs"].is_array()) throw ConfigError("data.inputs must be a list");
      for (const auto& in : d["inputs"]) {
        data::MixInput mi;
        if (in.is_string()) {
          mi.path = in.get<std::string>();
        } else {
          reject_unknown(in, "data.inputs[]", {"path", "weight"});
          std::string path;
          read(in, "path", path, "data.inputs[]");
          read(in, "weight", mi.weight, "data.inputs[]");
          mi.path = path;
        }
        if (mi.path.empty()) throw ConfigError("data.inputs[] has an empty path");
        if (!(mi.weight > 0.0)) throw ConfigError("data.inputs[] weight must be positive");
        c.data.inputs.push_back(std::move(mi));
      }
    }
  }
  {
    const auto& t = section(j, "train");
    if (t.contains("encoder") && t["encoder"].is_object() && t["encoder"].contains("seed")) {
      throw ConfigError("train.encoder.seed is derived from the top-level seed");
    }
    if (t.contains("schedule") && t["schedule"].is_object() && t["schedule"].contains("seed")) {
      throw ConfigError("train.schedule.seed is derived from the top-level seed");
    }
    c.train = train::train_config_from_json(t);
    c.train.encoder.seed = mix_seed(c.seed, "encoder");
    c.train.schedule_seed = mix_seed(c.seed, "schedule");
    c.train.validate();
  }
  {
    const auto& e = section(j, "eval");
    reject_unknown(e, "eval", {"checkpoint", "dataset", "mode", "poolings"});
    read(e, "checkpoint", c.eval.checkpoint, "eval");
    read(e, "dataset", c.eval.dataset, "eval");
    read(e, "mode", c.eval.mode, "eval");
    read(e, "poolings", c.eval.poolings, "eval");
    if (c.eval.mode != "desk" && c.eval.mode != "granularity" && c.eval.mode != "ablation") {
      throw ConfigError("eval.mode must be desk, granularity or ablation");
    }
    for (const auto& p : c.eval.poolings) pool::parse_pooling(p);
  }
  c.synth.seed = mix_seed(c.seed, "synth");
  c.mock.seed = mix_seed(c.seed, "mock");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw FileError(path.string(), "cannot open config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(std::move(j), overrides);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json mix = nlohmann::json::object();
  for (std::size_t i = 0; i < synth::kAllCategories.size(); ++i) {
    mix[synth::to_string(synth::kAllCategories[i])] = synth.mix.weights[i];
  }
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& in : data.inputs) inputs.push_back({{"path", in.path.string()}, {"weight", in.weight}});
  return {
      {"schema_version", kSchemaVersion},
      {"seed", seed},
      {"output_dir", output_dir.string()},
      {"backend",
       {{"kind", backend.kind},
        {"base_url", backend.http.base_url},
        {"path", backend.http.path},
        {"token_env", backend.http.token_env},
        {"model", synth.generation.model},
        {"temperature", synth.generation.temperature},
        {"timeout_seconds", backend.http.timeout_seconds},
        {"max_retries", backend.retry.max_retries},
        {"initial_backoff_ms", backend.retry.initial_backoff.count()},
        {"max_backoff_ms", backend.retry.max_backoff.count()},
        {"max_parallel", backend.max_parallel}}},
      {"mock",
       {{"seed", mock.seed},
        {"max_doc_words", mock.max_doc_words},
        {"max_query_words", mock.max_query_words},
        {"tasks_per_reply", mock.tasks_per_reply}}},
      {"synth",
       {{"seed", synth.seed},
        {"count", synth.count},
        {"category_mix", mix},
        {"tasks_per_category", synth.tasks_per_category},
        {"language", synth.generation.language},
        {"num_levels", synth.generation.num_levels},
        {"max_rounds", synth.max_rounds},
        {"output", synth_output}}},
      {"augment",
       {{"pairs", augment.pairs},
        {"strict", augment.strict},
        {"task", augment.task},
        {"output", augment.output}}},
      {"data", {{"inputs", inputs}, {"eval_fraction", data.eval_fraction},
                {"split_seed", mix_seed(seed, "split")}}},
      {"train", train::to_json(train)},
      {"eval",
       {{"checkpoint", eval.checkpoint},
        {"dataset", eval.dataset},
        {"mode", eval.mode},
        {"poolings", eval.poolings}}},
  };
}

}  // namespace mgh::app
