#include "latinlex/embedding_space.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "latinlex/error.h"
#include "latinlex/lexicon_io.h"
#include "latinlex/text.h"

namespace latinlex {
namespace {

void AppendFloat(float v, std::string* out) {
  char buf[32];
  int n = std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  out->append(buf, static_cast<size_t>(n));
}

std::vector<std::string_view> Fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
T ParseNumber(std::string_view field, const std::string& where) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kParse, "bad number '" + std::string(field) + "'", where);
  }
  return value;
}

std::vector<std::string_view> Lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && Trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::string Escape(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

}  // namespace

std::string_view ResolutionName(Resolution r) {
  switch (r) {
    case Resolution::kWordform: return "wordform";
    case Resolution::kSyntacticWord: return "syntactic_word";
    case Resolution::kLemma: return "lemma";
    case Resolution::kSuperlemma: return "superlemma";
  }
  return "?";
}

Resolution ParseResolution(std::string_view name) {
  for (Resolution r : kAllResolutions) {
    if (ResolutionName(r) == name) return r;
  }
  if (name == "sw" || name == "syntactic-word") return Resolution::kSyntacticWord;
  throw Error(ErrorCode::kValidation, "unknown resolution '" + std::string(name) + "'");
}

std::string SpaceKey::ToString() const {
  return layer + "/" + method + "/" + std::string(ResolutionName(resolution));
}

std::string SpaceKey::FileStem() const {
  return Escape(layer) + "__" + Escape(method) + "__" + std::string(ResolutionName(resolution));
}

SpaceKey SpaceKey::Parse(std::string_view text) {
  size_t b = text.rfind('/');
  size_t a = b == std::string_view::npos || b == 0 ? std::string_view::npos : text.rfind('/', b - 1);
  if (a == std::string_view::npos || a == 0 || b == a + 1 || b + 1 == text.size()) {
    throw Error(ErrorCode::kValidation,
                "space key '" + std::string(text) + "' is not layer/method/resolution");
  }
  SpaceKey key;
  key.layer = std::string(text.substr(0, a));
  key.method = std::string(text.substr(a + 1, b - a - 1));
  key.resolution = ParseResolution(text.substr(b + 1));
  return key;
}

uint32_t Fnv1a(std::string_view bytes) {
  uint32_t h = 2166136261u;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

std::vector<uint32_t> NgramBuckets(std::string_view symbol, int minn, int maxn, uint32_t buckets) {
  std::vector<uint32_t> out;
  if (buckets == 0 || minn <= 0 || maxn < minn) return out;
  std::u32string word = U"<" + DecodeUtf8(symbol) + U">";
  for (size_t i = 0; i < word.size(); ++i) {
    std::string gram;
    for (size_t n = 1; n <= static_cast<size_t>(maxn) && i + n <= word.size(); ++n) {
      AppendUtf8(word[i + n - 1], &gram);
      if (n < static_cast<size_t>(minn)) continue;
      if (n == word.size()) continue;  // the whole "<word>" is the word vector itself
      out.push_back(Fnv1a(gram) % buckets);
    }
  }
  return out;
}

double Cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

EmbeddingSpace::EmbeddingSpace(SpaceKey key, size_t dim, std::vector<std::string> vocabulary,
                               std::vector<uint64_t> counts, std::vector<float> vectors)
    : key_(std::move(key)),
      dim_(dim),
      vocabulary_(std::move(vocabulary)),
      counts_(std::move(counts)),
      vectors_(std::move(vectors)) {
  if (counts_.empty()) counts_.assign(vocabulary_.size(), 0);
  if (counts_.size() != vocabulary_.size() || vectors_.size() != vocabulary_.size() * dim_) {
    throw Error(ErrorCode::kValidation, "vocabulary, counts and vectors disagree in size");
  }
  BuildIndex();
}

void EmbeddingSpace::BuildIndex() {
  index_.clear();
  norms_.assign(vocabulary_.size(), 0);
  for (size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!index_.emplace(vocabulary_[i], i).second) {
      throw Error(ErrorCode::kValidation, "symbol '" + vocabulary_[i] + "' appears twice");
    }
    double s = 0;
    for (float v : Row(i)) s += static_cast<double>(v) * v;
    norms_[i] = std::sqrt(s);
  }
}

std::optional<size_t> EmbeddingSpace::Find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingSpace::Row(size_t index) const {
  return {vectors_.data() + index * dim_, dim_};
}

std::vector<float> EmbeddingSpace::Vector(std::string_view symbol) const {
  if (auto i = Find(symbol)) {
    auto row = Row(*i);
    return {row.begin(), row.end()};
  }
  if (subword_) {
    std::vector<uint32_t> ids = NgramBuckets(symbol, subword_->minn, subword_->maxn, subword_->buckets);
    if (!ids.empty()) {
      std::vector<float> out(dim_, 0.0f);
      for (uint32_t b : ids) {
        for (size_t d = 0; d < dim_; ++d) out[d] += subword_->vectors[b * dim_ + d];
      }
      for (float& v : out) v /= static_cast<float>(ids.size());
      return out;
    }
  }
  throw Error(ErrorCode::kNotFound,
              "'" + std::string(symbol) + "' is not in the vocabulary of " + key_.ToString());
}

double EmbeddingSpace::Similarity(std::string_view a, std::string_view b) const {
  std::vector<float> va = Vector(a);
  std::vector<float> vb = Vector(b);
  return Cosine(va, vb);
}

std::vector<std::pair<std::string, double>> EmbeddingSpace::NearestNeighbors(std::string_view seed,
                                                                             size_t m) const {
  auto s = Find(seed);
  if (!s) {
    throw Error(ErrorCode::kNotFound,
                "'" + std::string(seed) + "' is not in the vocabulary of " + key_.ToString());
  }
  std::vector<std::pair<double, size_t>> scored;
  scored.reserve(vocabulary_.size());
  auto q = Row(*s);
  for (size_t i = 0; i < vocabulary_.size(); ++i) {
    if (i == *s) continue;
    double dot = 0;
    auto r = Row(i);
    for (size_t d = 0; d < dim_; ++d) dot += static_cast<double>(q[d]) * r[d];
    double denom = norms_[*s] * norms_[i];
    scored.emplace_back(denom == 0 ? 0.0 : std::clamp(dot / denom, -1.0, 1.0), i);
  }
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  size_t k = std::min(m, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    better);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.emplace_back(vocabulary_[scored[i].second], scored[i].first);
  return out;
}

std::string EmbeddingSpace::Serialize() const {
  std::string out = std::to_string(vocabulary_.size()) + " " + std::to_string(dim_) + "\n";
  for (size_t i = 0; i < vocabulary_.size(); ++i) {
    out += vocabulary_[i];
    for (float v : Row(i)) {
      out += ' ';
      AppendFloat(v, &out);
    }
    out += '\n';
  }
  return out;
}

EmbeddingSpace EmbeddingSpace::Parse(std::string_view text, std::string_view source) {
  std::vector<std::string_view> lines = Lines(text);
  auto where = [&](size_t line) { return std::string(source) + ":" + std::to_string(line); };
  if (lines.empty()) throw Error(ErrorCode::kParse, "missing header", where(1));
  auto header = Fields(lines[0]);
  if (header.size() != 2) throw Error(ErrorCode::kParse, "header must be '|V| dim'", where(1));
  auto rows = ParseNumber<size_t>(header[0], where(1));
  auto dim = ParseNumber<size_t>(header[1], where(1));
  if (dim == 0) throw Error(ErrorCode::kParse, "dimension must be positive", where(1));
  if (lines.size() - 1 != rows) {
    throw Error(ErrorCode::kParse,
                "header announces " + std::to_string(rows) + " rows, file has " +
                    std::to_string(lines.size() - 1),
                where(lines.size() < rows + 1 ? lines.size() + 1 : rows + 2));
  }
  std::vector<std::string> vocab;
  std::vector<float> vectors;
  vocab.reserve(rows);
  vectors.reserve(rows * dim);
  for (size_t i = 1; i < lines.size(); ++i) {
    auto f = Fields(lines[i]);
    if (f.size() != dim + 1) {
      throw Error(ErrorCode::kParse,
                  "expected symbol and " + std::to_string(dim) + " components, got " +
                      std::to_string(f.empty() ? 0 : f.size() - 1),
                  where(i + 1));
    }
    vocab.emplace_back(f[0]);
    for (size_t d = 1; d <= dim; ++d) vectors.push_back(ParseNumber<float>(f[d], where(i + 1)));
  }
  try {
    return EmbeddingSpace(SpaceKey{}, dim, std::move(vocab), {}, std::move(vectors));
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, e.what(), std::string(source));
  }
}

void EmbeddingSpace::Save(const std::string& path) const {
  WriteFile(path, Serialize());
  std::string ngrams = path + ".ngrams";
  if (!subword_) {
    std::error_code ec;
    std::filesystem::remove(ngrams, ec);
    return;
  }
  std::string out = std::to_string(subword_->buckets) + " " + std::to_string(dim_) + " " +
                    std::to_string(subword_->minn) + " " + std::to_string(subword_->maxn) + "\n";
  for (uint32_t b = 0; b < subword_->buckets; ++b) {
    for (size_t d = 0; d < dim_; ++d) {
      if (d) out += ' ';
      AppendFloat(subword_->vectors[b * dim_ + d], &out);
    }
    out += '\n';
  }
  WriteFile(ngrams, out);
}

EmbeddingSpace EmbeddingSpace::Load(const std::string& path) {
  EmbeddingSpace space = Parse(ReadFile(path), path);
  std::string ngrams = path + ".ngrams";
  if (!std::filesystem::exists(ngrams)) return space;
  std::vector<std::string_view> lines;
  std::string text = ReadFile(ngrams);
  lines = Lines(text);
  auto where = [&](size_t line) { return ngrams + ":" + std::to_string(line); };
  if (lines.empty()) throw Error(ErrorCode::kParse, "missing header", where(1));
  auto h = Fields(lines[0]);
  if (h.size() != 4) throw Error(ErrorCode::kParse, "header must be 'buckets dim minn maxn'", where(1));
  SubwordTable table;
  table.buckets = ParseNumber<uint32_t>(h[0], where(1));
  auto dim = ParseNumber<size_t>(h[1], where(1));
  table.minn = ParseNumber<int>(h[2], where(1));
  table.maxn = ParseNumber<int>(h[3], where(1));
  if (dim != space.dim() || lines.size() - 1 != table.buckets) {
    throw Error(ErrorCode::kParse, "n-gram table does not match the space", where(1));
  }
  table.vectors.reserve(static_cast<size_t>(table.buckets) * dim);
  for (size_t i = 1; i < lines.size(); ++i) {
    auto f = Fields(lines[i]);
    if (f.size() != dim) throw Error(ErrorCode::kParse, "wrong number of components", where(i + 1));
    for (auto field : f) table.vectors.push_back(ParseNumber<float>(field, where(i + 1)));
  }
  space.set_subword(std::move(table));
  return space;
}

}  // namespace latinlex
