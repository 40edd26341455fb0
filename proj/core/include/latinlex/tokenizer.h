#ifndef LATINLEX_TOKENIZER_H_
#define LATINLEX_TOKENIZER_H_

#include <string>
#include <string_view>
#include <vector>

namespace latinlex {

// A span of the source text. Offsets are byte offsets into the UTF-8 input,
// [begin, end).
struct RawToken {
  std::string surface;
  size_t begin = 0;
  size_t end = 0;
  bool is_word = false;

  bool operator==(const RawToken&) const = default;
};

// Splits on whitespace; every punctuation or symbol character becomes a token
// of its own. Letters, digits and combining marks form words. No case folding
// or other normalization. Throws Error(kValidation) on invalid UTF-8.
std::vector<RawToken> Tokenize(std::string_view text);

bool IsWordCodepoint(char32_t cp);

}  // namespace latinlex

#endif  // LATINLEX_TOKENIZER_H_
