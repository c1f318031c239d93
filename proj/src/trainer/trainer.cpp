#include "trainer/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "common/digest.hpp"
#include "common/errors.hpp"
#include "datastore/datastore.hpp"
#include "encoder/checkpoint.hpp"

namespace mgh::train {
namespace {

void reject_unknown(const nlohmann::json& j, const char* where, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(std::string("unknown key '") + key + "' in " + where);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string wrap_query(const synth::TaskSpec& task, const std::string& text, bool instruct) {
  if (!instruct || task.description.empty()) return text;
  return "Instruct: " + task.description + "\nQuery: " + text;
}

TrainConfig::TrainConfig() {
  // Cosine logits in [-1, 1] barely move a toy encoder at τ = 1.
  loss.temperature = 50.0;
}

void TrainConfig::validate() const {
  encoder.validate();
  if (batch_size == 0) throw ConfigError("train.batch_size must be at least 1");
  if (batch_size < 2 && loss.in_batch_negatives) {
    throw ConfigError("train.batch_size must be at least 2 with in-batch negatives");
  }
  if (grad_accum == 0) throw ConfigError("train.grad_accum must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train.learning_rate must be positive");
  }
  if (!(loss.temperature > 0.0)) throw ConfigError("train.loss.temperature must be positive");
  cur::Schedule::build(schedule_spec());
}

cur::ScheduleSpec TrainConfig::schedule_spec() const {
  cur::ScheduleSpec s;
  s.strategy = strategy;
  s.total_steps = total_steps;
  s.num_levels = num_levels;
  s.seed = schedule_seed;
  s.fixed_level = fixed_level;
  return s;
}

double TrainConfig::lr_at(std::size_t step) const {
  if (warmup_steps == 0 || step >= warmup_steps) return learning_rate;
  return learning_rate * static_cast<double>(step) / static_cast<double>(warmup_steps);
}

nlohmann::json to_json(const TrainConfig& c) {
  return {
      {"encoder", enc::to_json(c.encoder)},
      {"pooling",
       {{"kind", pool::to_string(c.pooling.kind)},
        {"direction", pool::to_string(c.pooling.ata.direction)},
        {"stop_gradient", c.pooling.ata.stop_gradient},
        {"log_base", c.pooling.ata.log_base}}},
      {"loss",
       {{"temperature", c.loss.temperature},
        {"temperature_mode", obj::to_string(c.loss.mode)},
        {"in_batch_negatives", c.loss.in_batch_negatives},
        {"include_other_hard_negatives", c.loss.include_other_hard_negatives}}},
      {"instruct", c.instruct},
      {"batch_size", c.batch_size},
      {"grad_accum", c.grad_accum},
      {"total_steps", c.total_steps},
      {"learning_rate", c.learning_rate},
      {"warmup_steps", c.warmup_steps},
      {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
      {"schedule",
       {{"strategy", cur::to_string(c.strategy)},
        {"num_levels", c.num_levels},
        {"fixed_level", c.fixed_level},
        {"seed", c.schedule_seed}}},
      {"checkpoint_every", c.checkpoint_every},
  };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  reject_unknown(j, "train", {"encoder", "pooling", "loss", "instruct", "batch_size", "grad_accum",
                              "total_steps", "learning_rate", "warmup_steps", "adam", "schedule",
                              "checkpoint_every"});
  TrainConfig c;
  if (j.contains("encoder")) c.encoder = enc::encoder_config_from_json(j["encoder"]);
  if (j.contains("pooling")) {
    const auto& p = j["pooling"];
    reject_unknown(p, "train.pooling", {"kind", "direction", "stop_gradient", "log_base"});
    std::string kind = pool::to_string(c.pooling.kind);
    std::string direction = pool::to_string(c.pooling.ata.direction);
    read(p, "kind", kind);
    read(p, "direction", direction);
    c.pooling.kind = pool::parse_pooling(kind);
    c.pooling.ata.direction = pool::parse_direction(direction);
    read(p, "stop_gradient", c.pooling.ata.stop_gradient);
    read(p, "log_base", c.pooling.ata.log_base);
  }
  if (j.contains("loss")) {
    const auto& l = j["loss"];
    reject_unknown(l, "train.loss",
                   {"temperature", "temperature_mode", "in_batch_negatives",
                    "include_other_hard_negatives"});
    read(l, "temperature", c.loss.temperature);
    std::string mode = obj::to_string(c.loss.mode);
    read(l, "temperature_mode", mode);
    c.loss.mode = obj::parse_temperature_mode(mode);
    read(l, "in_batch_negatives", c.loss.in_batch_negatives);
    read(l, "include_other_hard_negatives", c.loss.include_other_hard_negatives);
  }
  read(j, "instruct", c.instruct);
  read(j, "batch_size", c.batch_size);
  read(j, "grad_accum", c.grad_accum);
  read(j, "total_steps", c.total_steps);
  read(j, "learning_rate", c.learning_rate);
  read(j, "warmup_steps", c.warmup_steps);
  read(j, "checkpoint_every", c.checkpoint_every);
  if (j.contains("adam")) {
    const auto& a = j["adam"];
    reject_unknown(a, "train.adam", {"beta1", "beta2", "eps"});
    read(a, "beta1", c.adam.beta1);
    read(a, "beta2", c.adam.beta2);
    read(a, "eps", c.adam.eps);
  }
  if (j.contains("schedule")) {
    const auto& s = j["schedule"];
    reject_unknown(s, "train.schedule", {"strategy", "num_levels", "fixed_level", "seed"});
    std::string strategy = cur::to_string(c.strategy);
    read(s, "strategy", strategy);
    c.strategy = cur::parse_strategy(strategy);
    read(s, "num_levels", c.num_levels);
    read(s, "fixed_level", c.fixed_level);
    read(s, "seed", c.schedule_seed);
  }
  return c;
}

BatchGradients batch_gradients(const enc::Encoder& model, const std::vector<Example>& batch,
                               const pool::PoolingSpec& pooling, const obj::InfoNceOptions& loss) {
  if (batch.empty()) throw ContractError("batch_gradients: empty batch");
  const bool with_negatives = !batch.front().negative.empty();
  const auto max_len = static_cast<std::size_t>(model.config().max_seq_len);
  num::Tape tape;
  const auto bound = enc::bind(model, tape, true);
  auto embed = [&](const std::string& text) {
    return pool::pool(enc::encode(bound, enc::tokenize(text, max_len)), pooling);
  };
  obj::ContrastiveBatch cb;
  for (const auto& ex : batch) {
    if (ex.negative.empty() == with_negatives) {
      throw ContractError("batch_gradients: hard negatives must be present for all items or none");
    }
    cb.queries.push_back(embed(ex.query));
    cb.positives.push_back(embed(ex.positive));
    if (with_negatives) cb.hard_negatives.push_back(embed(ex.negative));
  }
  num::Var l = obj::info_nce(cb, loss);
  tape.backward(l);
  BatchGradients out;
  out.loss = l.value().item();
  out.grads.reserve(bound.params.size());
  for (const auto& p : bound.params) out.grads.push_back(tape.grad_or_zeros(p));
  return out;
}

std::vector<std::size_t> batch_indices(std::size_t step, std::size_t micro, std::size_t batch_size,
                                       std::size_t grad_accum, std::size_t dataset_size) {
  if (step == 0 || dataset_size == 0) throw ContractError("batch_indices: bad step or dataset");
  std::vector<std::size_t> out(batch_size);
  const std::size_t base = (step - 1) * grad_accum * batch_size + micro * batch_size;
  for (std::size_t b = 0; b < batch_size; ++b) out[b] = (base + b) % dataset_size;
  return out;
}

Example make_example(const TrainingTriplet& t, int level, bool instruct) {
  if (level < 1 || static_cast<std::size_t>(level) > t.negatives.size()) {
    throw ContractError("level " + std::to_string(level) + " outside the triplet's negatives");
  }
  return {wrap_query(t.task, t.query, instruct), t.positive,
          t.negatives[static_cast<std::size_t>(level - 1)]};
}

std::string format_loss_log(const std::vector<StepLog>& log) {
  std::string out = "step\tlevel\tloss\n";
  char buf[64];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%.17g", e.loss);
    out += std::to_string(e.step) + "\t" + std::to_string(e.level) + "\t" + buf + "\n";
  }
  return out;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json losses_json = nlohmann::json::array();
  for (const auto& e : losses) losses_json.push_back({e.step, e.level, e.loss});
  return {{"status", status},
          {"diagnostic", diagnostic},
          {"config", config},
          {"schedule", schedule},
          {"dataset", {{"sha256", dataset_digest}, {"records", dataset_size}}},
          {"loss_log", losses_json},
          {"checkpoints", checkpoints},
          {"checkpoint_sha256", checkpoint_sha256}};
}

TrainResult train(const TrainConfig& cfg, const std::vector<TrainingTriplet>& data,
                  const std::filesystem::path& out_dir) {
  cfg.validate();
  if (data.empty()) throw ConfigError("training set is empty");
  if (data.size() < cfg.batch_size) {
    throw ConfigError("training set of " + std::to_string(data.size()) +
                      " records is smaller than one batch of " + std::to_string(cfg.batch_size));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].negatives.size() != static_cast<std::size_t>(cfg.num_levels)) {
      throw ConfigError("record " + std::to_string(i) + " has " +
                        std::to_string(data[i].negatives.size()) + " negatives, schedule uses " +
                        std::to_string(cfg.num_levels) + " levels");
    }
  }
  const auto schedule = cur::Schedule::build(cfg.schedule_spec());

  TrainResult result;
  RunManifest& m = result.manifest;
  m.config = to_json(cfg);
  m.schedule = schedule.to_json();
  m.dataset_digest = data::dataset_digest(data);
  m.dataset_size = data.size();

  result.model = enc::init_params(cfg.encoder);
  enc::Encoder& model = result.model;
  Adam adam(cfg.adam);

  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    const int level = schedule.level_at(step);
    std::vector<num::Tensor> grads;
    double loss_sum = 0.0;
    for (std::size_t micro = 0; micro < cfg.grad_accum; ++micro) {
      std::vector<Example> batch;
      for (auto i : batch_indices(step, micro, cfg.batch_size, cfg.grad_accum, data.size())) {
        batch.push_back(make_example(data[i], level, cfg.instruct));
      }
      auto g = batch_gradients(model, batch, cfg.pooling, cfg.loss);
      loss_sum += g.loss;
      if (grads.empty()) {
        grads = std::move(g.grads);
      } else {
        for (std::size_t p = 0; p < grads.size(); ++p) {
          auto dst = grads[p].data();
          auto src = g.grads[p].data();
          for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
        }
      }
    }
    const double loss = loss_sum / static_cast<double>(cfg.grad_accum);
    m.losses.push_back({step, level, loss});
    if (!std::isfinite(loss)) {
      m.status = "non_finite_loss";
      m.diagnostic = "loss became non-finite at step " + std::to_string(step) + " (level " +
                     std::to_string(level) + ")";
      throw TrainingAborted(m.diagnostic, m);
    }
    const double inv = 1.0 / static_cast<double>(cfg.grad_accum);
    for (auto& g : grads) {
      for (auto& x : g.data()) x *= inv;
    }
    adam.step(model.params(), grads, cfg.lr_at(step));

    if (!out_dir.empty() && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 &&
        step != cfg.total_steps) {
      const std::string name = "step-" + std::to_string(step) + ".ckpt";
      enc::save_checkpoint(model, out_dir / name);
      m.checkpoints.push_back(name);
    }
  }

  const std::string bytes = enc::serialize_checkpoint(model);
  m.checkpoint_sha256 = sha256_hex(bytes);
  if (!out_dir.empty()) {
    enc::save_checkpoint(model, out_dir / "model.ckpt");
    m.checkpoints.push_back("model.ckpt");
  }
  return result;
}

}  // namespace mgh::train
