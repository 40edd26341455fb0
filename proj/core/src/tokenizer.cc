#include "latinlex/tokenizer.h"

#include "latinlex/error.h"
#include "latinlex/text.h"

namespace latinlex {
namespace {

bool IsSpace(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0x85 || cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000 ||
         cp == 0xFEFF;
}

// Decodes one code point starting at text[i]; input is known to be valid.
char32_t Next(std::string_view text, size_t* i) {
  unsigned char c = static_cast<unsigned char>(text[*i]);
  size_t len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
  char32_t cp = len == 1 ? c : len == 2 ? c & 0x1F : len == 3 ? c & 0x0F : c & 0x07;
  for (size_t k = 1; k < len; ++k) {
    cp = (cp << 6) | (static_cast<unsigned char>(text[*i + k]) & 0x3F);
  }
  *i += len;
  return cp;
}

}  // namespace

bool IsWordCodepoint(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
  }
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF01 && cp <= 0xFF0F) return false;
  return true;
}

std::vector<RawToken> Tokenize(std::string_view text) {
  if (!IsValidUtf8(text)) throw Error(ErrorCode::kValidation, "text is not valid UTF-8");
  std::vector<RawToken> tokens;
  size_t i = 0;
  size_t word_begin = std::string_view::npos;
  auto close_word = [&](size_t end) {
    if (word_begin == std::string_view::npos) return;
    tokens.push_back({std::string(text.substr(word_begin, end - word_begin)), word_begin, end, true});
    word_begin = std::string_view::npos;
  };
  while (i < text.size()) {
    size_t start = i;
    char32_t cp = Next(text, &i);
    if (IsSpace(cp)) {
      close_word(start);
    } else if (IsWordCodepoint(cp)) {
      if (word_begin == std::string_view::npos) word_begin = start;
    } else {
      close_word(start);
      tokens.push_back({std::string(text.substr(start, i - start)), start, i, false});
    }
  }
  close_word(text.size());
  return tokens;
}

}  // namespace latinlex
