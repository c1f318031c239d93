#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "synth/types.hpp"

namespace mgh::synth {

// Stage 1: ask for a python list of about 20 one-sentence tasks.
std::string render_brainstorm_prompt(TaskCategory category);

// Stage 2: one (query, positive, graded negatives) example for `task`.
// The negative block carries num_levels slots tagged high, medium..., low.
std::string render_prompt(const TaskSpec& task, const PromptPlaceholders& ph,
                          std::size_t num_levels = kDefaultNumLevels);

// Stage-2 variant for an existing (query, positive) pair: only the graded
// negatives are requested.
std::string render_augment_prompt(const TaskSpec& task, std::string_view query,
                                  std::string_view positive, const PromptPlaceholders& ph,
                                  std::size_t num_levels = kDefaultNumLevels);

// Marker lines the prompts are built around.
inline constexpr std::string_view kStage2Opening = "You have been assigned a retrieval task: ";
inline constexpr std::string_view kAugmentExampleIntro = "Here is one retrieval example for this task:";

}  // namespace mgh::synth
