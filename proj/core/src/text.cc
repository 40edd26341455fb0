#include "latinlex/text.h"

#include "latinlex/error.h"

namespace latinlex {
namespace {

// Returns the number of bytes consumed, or 0 on a malformed sequence.
size_t DecodeOne(std::string_view text, size_t pos, char32_t* cp) {
  const auto byte = [&](size_t i) { return static_cast<unsigned char>(text[i]); };
  unsigned char lead = byte(pos);
  size_t len;
  char32_t value;
  if (lead < 0x80) {
    *cp = lead;
    return 1;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    value = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    value = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    value = lead & 0x07;
  } else {
    return 0;
  }
  if (pos + len > text.size()) return 0;
  for (size_t i = 1; i < len; ++i) {
    unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) return 0;
    value = (value << 6) | (c & 0x3F);
  }
  // Reject overlong encodings, surrogates and out-of-range values.
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (value < kMin[len] || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
    return 0;
  }
  *cp = value;
  return len;
}

}  // namespace

std::u32string DecodeUtf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    size_t n = DecodeOne(text, pos, &cp);
    if (n == 0) {
      throw Error(ErrorCode::kValidation, "invalid UTF-8 sequence",
                  "byte " + std::to_string(pos));
    }
    out.push_back(cp);
    pos += n;
  }
  return out;
}

bool IsValidUtf8(std::string_view text) {
  size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp;
    size_t n = DecodeOne(text, pos, &cp);
    if (n == 0) return false;
    pos += n;
  }
  return true;
}

void AppendUtf8(char32_t cp, std::string* out) {
  if (cp < 0x80) {
    out->push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out->push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out->push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out->push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string EncodeUtf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) AppendUtf8(cp, &out);
  return out;
}

char32_t ToLowerLatin(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  // Latin-1: U+00C0..U+00DE except the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  // Latin Extended-A pairs capital/small on even/odd code points, with the
  // exception of a short odd-aligned run between U+0139 and U+0148 and
  // between U+0179 and U+017E.
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  return cp;
}

Normalizer::Normalizer() : Normalizer({{U'v', U"u"}, {U'j', U"i"}}) {}

Normalizer::Normalizer(std::map<char32_t, std::u32string> folds) : folds_(std::move(folds)) {
  for (const auto& [source, target] : folds_) {
    if (ToLowerLatin(source) != source) {
      throw Error(ErrorCode::kValidation, "fold sources must be lowercase");
    }
    for (char32_t c : target) {
      if (folds_.count(c) || ToLowerLatin(c) != c) {
        throw Error(ErrorCode::kValidation,
                    "fold target '" + EncodeUtf8(target) + "' is not a fixed point");
      }
    }
  }
}

std::string Normalizer::Normalize(std::string_view raw) const {
  if (raw.empty()) throw Error(ErrorCode::kValidation, "cannot normalize an empty form");
  std::u32string decoded = DecodeUtf8(raw);
  std::string out;
  out.reserve(raw.size());
  for (char32_t cp : decoded) {
    char32_t lower = ToLowerLatin(cp);
    auto it = folds_.find(lower);
    if (it == folds_.end()) {
      AppendUtf8(lower, &out);
    } else {
      for (char32_t c : it->second) AppendUtf8(c, &out);
    }
  }
  return out;
}

std::string Normalizer::FoldSpec() const {
  std::string spec;
  for (const auto& [source, target] : folds_) {
    if (!spec.empty()) spec += ';';
    AppendUtf8(source, &spec);
    spec += '=';
    spec += EncodeUtf8(target);
  }
  return spec;
}

Normalizer Normalizer::Parse(std::string_view fold_spec) {
  std::map<char32_t, std::u32string> folds;
  if (Trim(fold_spec).empty()) return Normalizer(std::move(folds));
  for (const std::string& item : Split(fold_spec, ';')) {
    auto eq = item.find('=');
    std::u32string source = eq == std::string::npos ? U"" : DecodeUtf8(item.substr(0, eq));
    if (source.size() != 1) {
      throw Error(ErrorCode::kValidation, "malformed fold entry '" + item + "'");
    }
    folds[source[0]] = DecodeUtf8(item.substr(eq + 1));
  }
  return Normalizer(std::move(folds));
}

std::vector<std::string> Split(std::string_view text, char delimiter) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t end = text.find(delimiter, start);
    if (end == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      break;
    }
    parts.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

std::string Join(const std::vector<std::string>& parts, std::string_view delimiter) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += delimiter;
    out += parts[i];
  }
  return out;
}

std::string_view Trim(std::string_view text) {
  const char* ws = " \t\r\n";
  size_t b = text.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  size_t e = text.find_last_not_of(ws);
  return text.substr(b, e - b + 1);
}

bool EndsWith(std::string_view text, std::string_view suffix) {
  return text.size() >= suffix.size() &&
         text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace latinlex
