#ifndef LATINLEX_EMBEDDING_SPACE_H_
#define LATINLEX_EMBEDDING_SPACE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace latinlex {

enum class Resolution { kWordform, kSyntacticWord, kLemma, kSuperlemma };
std::string_view ResolutionName(Resolution r);
Resolution ParseResolution(std::string_view name);
inline constexpr Resolution kAllResolutions[] = {Resolution::kWordform, Resolution::kSyntacticWord,
                                                 Resolution::kLemma, Resolution::kSuperlemma};

// (layer, method, resolution). Method ids: cbow, skipgram, and the subword
// variants cbow-subword, skipgram-subword; "pu" is reserved.
struct SpaceKey {
  std::string layer;
  std::string method;
  Resolution resolution = Resolution::kWordform;

  std::string ToString() const;  // layer/method/resolution
  std::string FileStem() const;  // filesystem-safe
  static SpaceKey Parse(std::string_view text);
  auto operator<=>(const SpaceKey&) const = default;
};

// Character n-gram vectors of a subword model, kept so that out-of-vocabulary
// symbols can be composed at query time.
struct SubwordTable {
  int minn = 3;
  int maxn = 6;
  uint32_t buckets = 0;
  std::vector<float> vectors;  // buckets x dim
};

// N-gram bucket ids of "<symbol>" for lengths minn..maxn (codepoints),
// FNV-1a over the UTF-8 bytes.
std::vector<uint32_t> NgramBuckets(std::string_view symbol, int minn, int maxn, uint32_t buckets);
uint32_t Fnv1a(std::string_view bytes);

double Cosine(std::span<const float> a, std::span<const float> b);

class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  EmbeddingSpace(SpaceKey key, size_t dim, std::vector<std::string> vocabulary,
                 std::vector<uint64_t> counts, std::vector<float> vectors);

  const SpaceKey& key() const { return key_; }
  void set_key(SpaceKey key) { key_ = std::move(key); }
  size_t dim() const { return dim_; }
  size_t size() const { return vocabulary_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<uint64_t>& counts() const { return counts_; }
  const std::vector<float>& data() const { return vectors_; }

  std::optional<size_t> Find(std::string_view symbol) const;
  bool Contains(std::string_view symbol) const { return Find(symbol).has_value(); }
  std::span<const float> Row(size_t index) const;

  void set_subword(SubwordTable table) { subword_ = std::move(table); }
  const std::optional<SubwordTable>& subword() const { return subword_; }

  // In-vocabulary: the stored vector. Otherwise, with a subword table, the
  // mean of the symbol's n-gram vectors; without one Error(kNotFound).
  std::vector<float> Vector(std::string_view symbol) const;

  double Similarity(std::string_view a, std::string_view b) const;

  // Exact top-m by cosine, seed excluded, ties in vocabulary order. The seed
  // must be in the vocabulary (Error(kNotFound)).
  std::vector<std::pair<std::string, double>> NearestNeighbors(std::string_view seed,
                                                               size_t m) const;

  // Text format: "|V| dim", then "symbol v1 ... vdim" per line. A subword
  // table goes to <path>.ngrams in the same layout ("buckets dim minn maxn"
  // header, one unnamed row per bucket).
  void Save(const std::string& path) const;
  static EmbeddingSpace Load(const std::string& path);
  static EmbeddingSpace Parse(std::string_view text, std::string_view source = "<memory>");
  std::string Serialize() const;

 private:
  void BuildIndex();

  SpaceKey key_;
  size_t dim_ = 0;
  std::vector<std::string> vocabulary_;
  std::vector<uint64_t> counts_;
  std::vector<float> vectors_;
  std::vector<double> norms_;
  std::unordered_map<std::string, size_t> index_;
  std::optional<SubwordTable> subword_;
};

}  // namespace latinlex

#endif  // LATINLEX_EMBEDDING_SPACE_H_
