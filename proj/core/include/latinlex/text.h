#ifndef LATINLEX_TEXT_H_
#define LATINLEX_TEXT_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace latinlex {

// UTF-8 helpers. Decoding throws Error(kValidation) on malformed input.
std::u32string DecodeUtf8(std::string_view text);
std::string EncodeUtf8(std::u32string_view text);
void AppendUtf8(char32_t cp, std::string* out);
bool IsValidUtf8(std::string_view text);

// Lowercases ASCII, Latin-1 and Latin Extended-A letters (the ranges that
// occur in Latin editions, including macron vowels).
char32_t ToLowerLatin(char32_t cp);

// Orthographic normalization applied to superlemma forms and to wordforms
// before index lookup: lowercase, then a per-lexicon character fold table.
class Normalizer {
 public:
  // Default folds v->u and j->i.
  Normalizer();

  // Fold targets may not themselves be fold sources; otherwise normalization
  // would not be idempotent. Throws Error(kValidation).
  explicit Normalizer(std::map<char32_t, std::u32string> folds);

  // Throws Error(kValidation) for empty or non-UTF-8 input.
  std::string Normalize(std::string_view raw) const;

  const std::map<char32_t, std::u32string>& folds() const { return folds_; }

  // "v=u;j=i" round-trips through Parse.
  std::string FoldSpec() const;
  static Normalizer Parse(std::string_view fold_spec);

 private:
  std::map<char32_t, std::u32string> folds_;
};

// Splits on a single delimiter character, keeping empty fields.
std::vector<std::string> Split(std::string_view text, char delimiter);
std::string Join(const std::vector<std::string>& parts, std::string_view delimiter);
std::string_view Trim(std::string_view text);
bool EndsWith(std::string_view text, std::string_view suffix);

}  // namespace latinlex

#endif  // LATINLEX_TEXT_H_
