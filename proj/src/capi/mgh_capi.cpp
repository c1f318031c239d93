#include "mgh/mgh.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "app/commands.hpp"
#include "app/run_config.hpp"
#include "curriculum/curriculum.hpp"
#include "encoder/checkpoint.hpp"
#include "evalkit/evalkit.hpp"
#include "pooling/pooling.hpp"

struct mgh_run {
  nlohmann::json raw;
  std::vector<std::string> overrides;
  mgh::app::RunConfig config;
};

struct mgh_model {
  mgh::enc::Encoder encoder;
};

namespace {

thread_local std::string g_last_error;

mgh_status fail(mgh_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

// Runs fn, translating exceptions into a status plus mgh_last_error().
template <typename Fn>
mgh_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return MGH_OK;
  } catch (const mgh::Error& e) {
    return fail(static_cast<mgh_status>(mgh::app::exit_code(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MGH_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MGH_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MGH_ERR_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw mgh::ContractError(std::string(what) + " is NULL");
}

template <typename Cmd>
mgh_status run_command(const mgh_run* run, char** out_summary, Cmd&& cmd) {
  return guarded([&] {
    require(run, "run");
    const auto summary = cmd(run->config);
    if (out_summary) *out_summary = dup_string(summary.dump(2));
  });
}

}  // namespace

extern "C" {

const char* mgh_version(void) { return "0.1.0"; }

const char* mgh_last_error(void) { return g_last_error.c_str(); }

void mgh_string_free(char* s) { std::free(s); }

mgh_status mgh_run_from_json(const char* config_json, mgh_run** out) {
  return guarded([&] {
    require(config_json, "config_json");
    require(out, "out");
    *out = nullptr;
    auto run = std::make_unique<mgh_run>();
    try {
      run->raw = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw mgh::ConfigError(std::string("config is not JSON: ") + e.what());
    }
    run->config = mgh::app::parse_run_config(run->raw);
    *out = run.release();
  });
}

mgh_status mgh_run_open(const char* config_path, mgh_run** out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    *out = nullptr;
    auto run = std::make_unique<mgh_run>();
    std::ifstream in(config_path);
    if (!in) throw mgh::FileError(config_path, "cannot open config");
    try {
      run->raw = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw mgh::ConfigError(std::string(config_path) + ": " + e.what());
    }
    run->config = mgh::app::parse_run_config(run->raw);
    *out = run.release();
  });
}

mgh_status mgh_run_set(mgh_run* run, const char* assignment) {
  return guarded([&] {
    require(run, "run");
    require(assignment, "assignment");
    auto overrides = run->overrides;
    overrides.emplace_back(assignment);
    run->config = mgh::app::parse_run_config(run->raw, overrides);
    run->overrides = std::move(overrides);
  });
}

mgh_status mgh_run_resolved_json(const mgh_run* run, char** out_json) {
  return guarded([&] {
    require(run, "run");
    require(out_json, "out_json");
    *out_json = dup_string(run->config.to_json().dump(2));
  });
}

void mgh_run_free(mgh_run* run) { delete run; }

mgh_status mgh_cmd_synth(const mgh_run* run, char** out_summary) {
  return run_command(run, out_summary, mgh::app::cmd_synth);
}

mgh_status mgh_cmd_augment(const mgh_run* run, char** out_summary) {
  return run_command(run, out_summary, mgh::app::cmd_augment);
}

mgh_status mgh_cmd_train(const mgh_run* run, char** out_summary) {
  return run_command(run, out_summary, mgh::app::cmd_train);
}

mgh_status mgh_cmd_eval(const mgh_run* run, char** out_summary) {
  return run_command(run, out_summary, mgh::app::cmd_eval);
}

mgh_status mgh_model_load(const char* checkpoint_path, mgh_model** out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    *out = nullptr;
    auto m = std::make_unique<mgh_model>();
    m->encoder = mgh::enc::load_checkpoint(checkpoint_path);
    *out = m.release();
  });
}

mgh_status mgh_model_init(const char* encoder_json, mgh_model** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    nlohmann::json j = nlohmann::json::object();
    if (encoder_json != nullptr) {
      try {
        j = nlohmann::json::parse(encoder_json);
      } catch (const nlohmann::json::exception& e) {
        throw mgh::ConfigError(std::string("encoder config is not JSON: ") + e.what());
      }
    }
    auto m = std::make_unique<mgh_model>();
    m->encoder = mgh::enc::init_params(mgh::enc::encoder_config_from_json(j));
    *out = m.release();
  });
}

mgh_status mgh_model_save(const mgh_model* model, const char* checkpoint_path) {
  return guarded([&] {
    require(model, "model");
    require(checkpoint_path, "checkpoint_path");
    mgh::enc::save_checkpoint(model->encoder, checkpoint_path);
  });
}

void mgh_model_free(mgh_model* model) { delete model; }

size_t mgh_model_dim(const mgh_model* model) {
  return model == nullptr ? 0 : static_cast<size_t>(model->encoder.config().model_dim);
}

mgh_status mgh_model_embed(const mgh_model* model, const char* text, const char* pooling,
                           double* out, size_t out_len) {
  return guarded([&] {
    require(model, "model");
    require(text, "text");
    require(pooling, "pooling");
    require(out, "out");
    mgh::pool::PoolingSpec spec;
    spec.kind = mgh::pool::parse_pooling(pooling);
    const mgh::eval::Embedder embed{&model->encoder, spec};
    const auto v = embed(text);
    if (out_len < v.size()) {
      throw mgh::ContractError("output buffer holds " + std::to_string(out_len) + " values, need " +
                               std::to_string(v.size()));
    }
    std::copy(v.begin(), v.end(), out);
  });
}

mgh_status mgh_inspect(const mgh_model* model, const char* text, const char* direction,
                       int with_attention, char** out_tsv) {
  return guarded([&] {
    require(model, "model");
    require(text, "text");
    require(out_tsv, "out_tsv");
    const auto dir = mgh::pool::parse_direction(direction ? direction : "incoming");
    const auto report = mgh::eval::inspect_weights(model->encoder, text, dir);
    *out_tsv = dup_string(report.to_tsv(with_attention != 0));
  });
}

mgh_status mgh_ata_weights(const double* attention, size_t heads, size_t k, const char* direction,
                           double* raw, double* normalized) {
  return guarded([&] {
    require(attention, "attention");
    require(raw, "raw");
    require(normalized, "normalized");
    if (heads == 0 || k == 0) throw mgh::ShapeError("attention needs at least one head and token");
    std::vector<double> values(attention, attention + heads * k * k);
    const mgh::num::Tensor t({heads, k, k}, std::move(values));
    const auto w = mgh::pool::ata_weights(t, mgh::pool::parse_direction(direction ? direction : "incoming"));
    std::copy(w.raw.begin(), w.raw.end(), raw);
    std::copy(w.normalized.begin(), w.normalized.end(), normalized);
  });
}

mgh_status mgh_schedule_levels(const char* strategy, size_t total_steps, int num_levels,
                               uint64_t seed, int fixed_level, int* levels_out) {
  return guarded([&] {
    require(strategy, "strategy");
    require(levels_out, "levels_out");
    mgh::cur::ScheduleSpec spec;
    spec.strategy = mgh::cur::parse_strategy(strategy);
    spec.total_steps = total_steps;
    spec.num_levels = num_levels;
    spec.seed = seed;
    spec.fixed_level = fixed_level;
    const auto s = mgh::cur::Schedule::build(spec);
    std::copy(s.levels().begin(), s.levels().end(), levels_out);
  });
}

}  // extern "C"
