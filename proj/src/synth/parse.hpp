#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "common/errors.hpp"
#include "synth/types.hpp"

namespace mgh::synth {

// A reply that could not be read as the requested structure at all. Keeps
// the raw text for diagnostics.
class GenerationFormatError : public ValidationError {
 public:
  GenerationFormatError(std::string violation, const std::string& detail, std::string raw)
      : ValidationError(std::move(violation), detail), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Reads a list of strings (JSON or python literal, optionally inside prose
// or code fences). Whitespace runs collapse to single spaces; empty items
// are dropped. Throws GenerationFormatError("not_list") when no list parses.
std::vector<std::string> parse_string_list(std::string_view raw);

// Extracts the single JSON object in a reply, tolerating surrounding prose
// and code fences. Throws GenerationFormatError("not_json").
std::string extract_json_object(std::string_view raw);

// Stage-2 reply -> triplet (source = synthetic, task left empty). Violation
// codes: not_json, missing_field, field_type, negative_count, level_order,
// empty_text, duplicate_negative, negative_equals_positive.
TrainingTriplet parse_generation(std::string_view raw,
                                 std::size_t num_levels = kDefaultNumLevels);

// Augmentation reply -> ordered negatives only.
std::vector<std::string> parse_negatives(std::string_view raw,
                                         std::size_t num_levels = kDefaultNumLevels);

}  // namespace mgh::synth
