#include "app/commands.hpp"

#include <fstream>

#include "common/digest.hpp"
#include "datastore/datastore.hpp"
#include "encoder/checkpoint.hpp"

namespace mgh::app {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(path.string(), "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw FileError(path.string(), "write failed");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::filesystem::path prepare_output_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw FileError(cfg.output_dir.string(), "cannot create output directory");
  return cfg.output_dir;
}

std::filesystem::path under(const RunConfig& cfg, const std::string& name) {
  std::filesystem::path p(name);
  return p.is_absolute() ? p : cfg.output_dir / p;
}

data::Split load_split(const RunConfig& cfg) {
  if (cfg.data.inputs.empty()) throw ConfigError("data.inputs names no dataset");
  std::vector<std::pair<std::vector<synth::TrainingTriplet>, double>> sources;
  for (const auto& in : cfg.data.inputs) {
    if (!std::filesystem::exists(in.path)) throw FileError(in.path.string(), "dataset not found");
    auto r = data::read_dataset(in.path, true, static_cast<std::size_t>(cfg.train.num_levels));
    sources.emplace_back(std::move(r.triplets), in.weight);
  }
  return data::mix_and_split(sources, mix_seed(cfg.seed, "split"), cfg.data.eval_fraction);
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::internal: return 1;
    case ErrorKind::config: return 2;
    case ErrorKind::file: return 3;
    case ErrorKind::transport: return 4;
    case ErrorKind::validation: return 5;
    case ErrorKind::format: return 6;
    case ErrorKind::numeric: return 7;
    case ErrorKind::contract:
    case ErrorKind::shape:
    case ErrorKind::degenerate: return 8;
  }
  return 1;
}

BackendStack make_backend(const RunConfig& cfg) {
  BackendStack s;
  if (cfg.backend.kind == "mock") {
    s.inner = std::make_unique<synth::MockBackend>(cfg.mock);
  } else {
    s.inner = std::make_unique<synth::HttpBackend>(cfg.backend.http);
  }
  s.resilient = std::make_unique<synth::ResilientBackend>(
      *s.inner, cfg.backend.retry, cfg.backend.max_parallel, mix_seed(cfg.seed, "jitter"));
  return s;
}

nlohmann::json cmd_synth(const RunConfig& cfg) {
  cfg.synth.validate();
  auto backend = make_backend(cfg);
  const auto dir = prepare_output_dir(cfg);
  synth::SynthesisReport report;
  const auto triplets = synth::synthesize(cfg.synth, backend.get(), report);
  const auto path = under(cfg, cfg.synth_output);
  data::write_dataset(triplets, path);
  nlohmann::json summary = {{"command", "synth"},
                            {"dataset", path.string()},
                            {"records", triplets.size()},
                            {"report", report.to_json()},
                            {"config", cfg.to_json()}};
  write_json(dir / "synth_report.json", summary);
  return summary;
}

nlohmann::json cmd_augment(const RunConfig& cfg) {
  if (cfg.augment.pairs.empty()) throw ConfigError("augment.pairs names no pair file");
  const auto pairs = data::read_pairs(cfg.augment.pairs, cfg.augment.strict);
  auto backend = make_backend(cfg);
  const auto dir = prepare_output_dir(cfg);
  synth::SynthesisReport report;
  const synth::TaskSpec task{synth::TaskCategory::short_long, cfg.augment.task};
  const auto triplets = synth::augment_pairs(pairs.pairs, task, cfg.synth, backend.get(), report);
  const auto path = under(cfg, cfg.augment.output);
  data::write_dataset(triplets, path);
  nlohmann::json summary = {{"command", "augment"},
                            {"dataset", path.string()},
                            {"records", triplets.size()},
                            {"pairs", pairs.report.to_json()},
                            {"report", report.to_json()},
                            {"config", cfg.to_json()}};
  write_json(dir / "augment_report.json", summary);
  return summary;
}

nlohmann::json cmd_train(const RunConfig& cfg) {
  const auto split = load_split(cfg);
  const auto dir = prepare_output_dir(cfg);
  data::write_dataset(split.eval, dir / "eval.jsonl");

  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& in : cfg.data.inputs) {
    inputs.push_back({{"path", in.path.string()}, {"sha256", sha256_file(in.path)}});
  }
  auto manifest_json = [&](const train::RunManifest& m) {
    nlohmann::json j = m.to_json();
    j["config"] = cfg.to_json();
    j["dataset"]["inputs"] = inputs;
    j["dataset"]["eval_sha256"] = data::dataset_digest(split.eval);
    j["dataset"]["eval_records"] = split.eval.size();
    return j;
  };
  try {
    auto result = train::train(cfg.train, split.train, dir);
    write_text(dir / "loss_log.tsv", train::format_loss_log(result.manifest.losses));
    const auto j = manifest_json(result.manifest);
    write_json(dir / "manifest.json", j);
    return j;
  } catch (const train::TrainingAborted& e) {
    write_text(dir / "loss_log.tsv", train::format_loss_log(e.manifest().losses));
    write_json(dir / "manifest.json", manifest_json(e.manifest()));
    throw;
  }
}

nlohmann::json cmd_eval(const RunConfig& cfg) {
  const bool instruct = cfg.train.instruct;
  if (cfg.eval.mode == "ablation") {
    if (cfg.eval.poolings.size() < 2) {
      throw ConfigError("ablation mode needs at least two poolings, got " +
                        std::to_string(cfg.eval.poolings.size()));
    }
    std::vector<pool::PoolingSpec> specs;
    for (const auto& p : cfg.eval.poolings) {
      pool::PoolingSpec s = cfg.train.pooling;
      s.kind = pool::parse_pooling(p);
      specs.push_back(s);
    }
    const auto split = load_split(cfg);
    const auto dir = prepare_output_dir(cfg);
    const auto rows = eval::pooling_ablation(cfg.train, specs, split.train, split.eval);
    nlohmann::json table = nlohmann::json::array();
    for (const auto& r : rows) {
      table.push_back({{"pooling", r.pooling}, {"final_loss", r.final_loss},
                       {"report", r.report.to_json()}});
    }
    write_text(dir / "ablation.tsv", eval::ablation_tsv(rows));
    nlohmann::json summary = {{"command", "eval"}, {"mode", "ablation"}, {"rows", table},
                              {"config", cfg.to_json()}};
    write_json(dir / "ablation.json", summary);
    return summary;
  }

  const std::filesystem::path ckpt =
      cfg.eval.checkpoint.empty() ? cfg.output_dir / "model.ckpt" : std::filesystem::path(cfg.eval.checkpoint);
  const std::filesystem::path dataset =
      cfg.eval.dataset.empty() ? cfg.output_dir / "eval.jsonl" : std::filesystem::path(cfg.eval.dataset);
  const auto model = enc::load_checkpoint(ckpt);
  if (!std::filesystem::exists(dataset)) throw FileError(dataset.string(), "eval dataset not found");
  const auto set = data::read_dataset(dataset, true, static_cast<std::size_t>(cfg.train.num_levels));
  const auto dir = prepare_output_dir(cfg);
  const eval::Embedder embed{&model, cfg.train.pooling};
  nlohmann::json summary = {{"command", "eval"},
                            {"mode", cfg.eval.mode},
                            {"checkpoint", ckpt.string()},
                            {"checkpoint_sha256", sha256_file(ckpt)},
                            {"dataset", dataset.string()}};
  if (cfg.eval.mode == "granularity") {
    const auto g = eval::granularity_stats(set.triplets, embed, instruct);
    summary["granularity"] = g.to_json();
    summary["strictly_decreasing"] = g.strictly_decreasing();
    write_text(dir / "granularity.tsv", g.to_tsv());
  } else {
    const auto r = eval::evaluate_desk(set.triplets, embed, instruct);
    summary["report"] = r.to_json();
    summary["strictly_decreasing"] = r.granularity.strictly_decreasing();
    write_text(dir / "granularity.tsv", r.granularity.to_tsv());
  }
  write_json(dir / "eval_report.json", summary);
  return summary;
}

eval::WeightReport cmd_inspect(const std::filesystem::path& checkpoint, const std::string& text,
                               pool::AtaDirection direction) {
  const auto model = enc::load_checkpoint(checkpoint);
  return eval::inspect_weights(model, text, direction);
}

}  // namespace mgh::app
