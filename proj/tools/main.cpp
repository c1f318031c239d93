// Command-line front end. Talks to the library only through mgh/mgh.h.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mgh/mgh.h"

namespace {

int report(mgh_status s) {
  if (s != MGH_OK) std::fprintf(stderr, "error: %s\n", mgh_last_error());
  return static_cast<int>(s);
}

void print_and_free(char* s) {
  if (s == nullptr) return;
  std::fputs(s, stdout);
  std::fputc('\n', stdout);
  mgh_string_free(s);
}

using Command = mgh_status (*)(const mgh_run*, char**);

int run_command(const std::string& config, const std::vector<std::string>& overrides,
                Command cmd, bool print_config) {
  mgh_run* run = nullptr;
  mgh_status s = mgh_run_open(config.c_str(), &run);
  if (s != MGH_OK) return report(s);
  for (const auto& o : overrides) {
    s = mgh_run_set(run, o.c_str());
    if (s != MGH_OK) {
      mgh_run_free(run);
      return report(s);
    }
  }
  if (print_config) {
    char* resolved = nullptr;
    s = mgh_run_resolved_json(run, &resolved);
    if (s == MGH_OK) print_and_free(resolved);
    mgh_run_free(run);
    return report(s);
  }
  char* summary = nullptr;
  s = cmd(run, &summary);
  mgh_run_free(run);
  if (s == MGH_OK) print_and_free(summary);
  return report(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-granularity hard-negative embedding toolkit"};
  app.set_version_flag("--version", std::string(mgh_version()));
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  bool print_config = false;

  struct Spec {
    const char* name;
    const char* help;
    Command cmd;
  };
  const Spec specs[] = {
      {"synth", "Generate a synthetic triplet dataset", mgh_cmd_synth},
      {"augment", "Add graded hard negatives to (query, positive) pairs", mgh_cmd_augment},
      {"train", "Train the encoder with the configured schedule", mgh_cmd_train},
      {"eval", "Evaluate a checkpoint (desk, granularity or ablation mode)", mgh_cmd_eval},
  };
  std::vector<std::pair<CLI::App*, Command>> commands;
  std::string eval_mode, eval_checkpoint;
  for (const auto& spec : specs) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    sub->add_option("-c,--config", config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "Override a config value: section.key=value")
        ->take_all();
    sub->add_flag("--print-config", print_config, "Print the resolved config and exit");
    if (std::string(spec.name) == "eval") {
      sub->add_option("--mode", eval_mode, "desk | granularity | ablation");
      sub->add_option("--checkpoint", eval_checkpoint, "Checkpoint to evaluate");
    }
    commands.emplace_back(sub, spec.cmd);
  }

  std::string checkpoint, text, direction = "incoming";
  bool attention = false;
  auto* inspect = app.add_subcommand("inspect", "Per-token anchor weights of a checkpoint");
  inspect->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  inspect->add_option("--text", text, "Input text")->required();
  inspect->add_option("--direction", direction, "incoming | literal");
  inspect->add_flag("--attention", attention, "Append the head-summed attention map");

  CLI11_PARSE(app, argc, argv);

  if (*inspect) {
    mgh_model* model = nullptr;
    mgh_status s = mgh_model_load(checkpoint.c_str(), &model);
    if (s != MGH_OK) return report(s);
    char* tsv = nullptr;
    s = mgh_inspect(model, text.c_str(), direction.c_str(), attention ? 1 : 0, &tsv);
    mgh_model_free(model);
    if (s == MGH_OK) std::fputs(tsv, stdout), mgh_string_free(tsv);
    return report(s);
  }
  if (!eval_mode.empty()) overrides.push_back("eval.mode=\"" + eval_mode + "\"");
  if (!eval_checkpoint.empty()) overrides.push_back("eval.checkpoint=\"" + eval_checkpoint + "\"");
  for (const auto& [sub, cmd] : commands) {
    if (*sub) return run_command(config, overrides, cmd, print_config);
  }
  return 1;
}
