#include "encoder/tokenizer.hpp"

#include <cstdio>

#include "common/errors.hpp"

namespace mgh::enc {

TokenSequence tokenize(std::string_view text, std::size_t max_seq_len) {
  if (max_seq_len == 0) throw ConfigError("max_seq_len must be at least 1");
  TokenSequence seq;
  if (max_seq_len == 1) {
    seq.ids = {kEosId};
    return seq;
  }
  const std::size_t room = max_seq_len - 2;
  const std::size_t n = std::min(room, text.size());
  seq.ids.reserve(n + 2);
  seq.ids.push_back(kBosId);
  for (std::size_t i = 0; i < n; ++i) {
    seq.ids.push_back(static_cast<unsigned char>(text[i]));
  }
  seq.ids.push_back(kEosId);
  return seq;
}

std::string render_token(int id) {
  if (id == kBosId) return "<bos>";
  if (id == kEosId) return "<eos>";
  if (id == ' ') return "\\s";
  if (id == '\t') return "\\t";
  if (id == '\n') return "\\n";
  if (id >= 0x21 && id < 0x7f) return std::string(1, static_cast<char>(id));
  char buf[8];
  std::snprintf(buf, sizeof buf, "\\x%02x", id & 0xff);
  return buf;
}

}  // namespace mgh::enc
