#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mgh::enc {

inline constexpr int kBosId = 256;
inline constexpr int kEosId = 257;
inline constexpr int kByteVocabSize = 258;

struct TokenSequence {
  std::vector<int> ids;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

// Byte-level ids framed by BOS/EOS. Inputs longer than max_seq_len keep
// their prefix; EOS always stays the final token.
TokenSequence tokenize(std::string_view text, std::size_t max_seq_len);

// Printable rendering used by the weight inspection report.
std::string render_token(int id);

}  // namespace mgh::enc
