#include "synth/parse.hpp"

#include <cctype>
#include <optional>

#include "json.hpp"

namespace mgh::synth {
namespace {

std::string collapse_ws(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

// Python-literal list of quoted strings: ['a', "b", ...].
std::optional<std::vector<std::string>> parse_python_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  skip_ws();
  if (i >= s.size() || s[i] != '[') return std::nullopt;
  ++i;
  skip_ws();
  if (i < s.size() && s[i] == ']') return out;
  while (i < s.size()) {
    skip_ws();
    if (i >= s.size() || (s[i] != '\'' && s[i] != '"')) return std::nullopt;
    const char quote = s[i++];
    std::string item;
    bool closed = false;
    while (i < s.size()) {
      char c = s[i++];
      if (c == '\\' && i < s.size()) {
        char e = s[i++];
        switch (e) {
          case 'n': item.push_back('\n'); break;
          case 't': item.push_back('\t'); break;
          default: item.push_back(e); break;
        }
      } else if (c == quote) {
        closed = true;
        break;
      } else {
        item.push_back(c);
      }
    }
    if (!closed) return std::nullopt;
    out.push_back(std::move(item));
    skip_ws();
    if (i < s.size() && s[i] == ',') {
      ++i;
      skip_ws();
      if (i < s.size() && s[i] == ']') return out;  // trailing comma
      continue;
    }
    if (i < s.size() && s[i] == ']') return out;
    return std::nullopt;
  }
  return std::nullopt;
}

const nlohmann::json& require_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("missing_field", std::string("no '") + key + "' field");
  return *it;
}

std::string require_string(const nlohmann::json& obj, const char* key) {
  const auto& v = require_field(obj, key);
  if (!v.is_string()) throw ValidationError("field_type", std::string("'") + key + "' is not a string");
  return v.get<std::string>();
}

std::vector<std::string> read_negative_list(const nlohmann::json& obj, std::size_t num_levels) {
  const auto& list = require_field(obj, "hard_negative_document");
  if (!list.is_array()) throw ValidationError("field_type", "'hard_negative_document' is not a list");
  if (list.size() != num_levels) {
    throw ValidationError("negative_count", "expected " + std::to_string(num_levels) +
                                                " negatives, got " + std::to_string(list.size()));
  }
  const auto tags = level_tags(num_levels);
  std::vector<std::string> texts;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const auto& item = list[k];
    if (!item.is_object()) {
      throw ValidationError("level_order", "negative " + std::to_string(k + 1) +
                                               " carries no similarity_level tag");
    }
    const std::string tag = require_string(item, "similarity_level");
    if (tag != tags[k]) {
      throw ValidationError("level_order", "negative " + std::to_string(k + 1) + " tagged '" + tag +
                                               "', expected '" + tags[k] + "'");
    }
    texts.push_back(require_string(item, "text"));
  }
  return texts;
}

nlohmann::json parse_object(std::string_view raw) {
  const std::string text = extract_json_object(raw);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw GenerationFormatError("not_json", e.what(), std::string(raw));
  }
}

}  // namespace

std::vector<std::string> parse_string_list(std::string_view raw) {
  const auto open = raw.find('[');
  const auto close = raw.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw GenerationFormatError("not_list", "reply contains no list", std::string(raw));
  }
  const std::string_view body = raw.substr(open, close - open + 1);
  std::vector<std::string> items;
  bool parsed = false;
  try {
    const auto j = nlohmann::json::parse(body);
    if (j.is_array()) {
      parsed = true;
      for (const auto& e : j) {
        if (!e.is_string()) {
          parsed = false;
          break;
        }
        items.push_back(e.get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception&) {
  }
  if (!parsed) {
    auto py = parse_python_list(body);
    if (!py) throw GenerationFormatError("not_list", "reply list does not parse", std::string(raw));
    items = std::move(*py);
  }
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::string s = collapse_ws(item);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

std::string extract_json_object(std::string_view raw) {
  const auto open = raw.find('{');
  const auto close = raw.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw GenerationFormatError("not_json", "reply contains no JSON object", std::string(raw));
  }
  return std::string(raw.substr(open, close - open + 1));
}

TrainingTriplet parse_generation(std::string_view raw, std::size_t num_levels) {
  const auto obj = parse_object(raw);
  if (!obj.is_object()) throw GenerationFormatError("not_json", "reply is not an object", std::string(raw));
  TrainingTriplet t;
  t.query = require_string(obj, "user_query");
  t.positive = require_string(obj, "positive_document");
  t.negatives = read_negative_list(obj, num_levels);
  t.source = Source::synthetic;
  validate_triplet(t, num_levels);
  return t;
}

std::vector<std::string> parse_negatives(std::string_view raw, std::size_t num_levels) {
  const auto obj = parse_object(raw);
  if (!obj.is_object()) throw GenerationFormatError("not_json", "reply is not an object", std::string(raw));
  auto negatives = read_negative_list(obj, num_levels);
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    if (negatives[k].empty()) {
      throw ValidationError("empty_text", "negative " + std::to_string(k + 1) + " is empty");
    }
  }
  return negatives;
}

}  // namespace mgh::synth
