#ifndef LATINLEX_FEATURES_H_
#define LATINLEX_FEATURES_H_

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace latinlex {

// Part-of-speech inventory. XY collects unknown cases.
enum class PosTag : uint8_t {
  kADJ, kADV, kAP, kCON, kDIST, kFM, kITJ, kNE, kNN, kNP, kNUM, kORD, kPRO, kPTC, kV, kXY,
};
inline constexpr size_t kPosTagCount = 16;

std::string_view PosTagName(PosTag pos);
// Throws Error(kValidation) for codes outside the inventory.
PosTag ParsePosTag(std::string_view code);
std::span<const PosTag> AllPosTags();

// Grammatical feature keys, in the fixed serialization order.
enum class Feature : uint8_t {
  kCase, kNumber, kGender, kPerson, kTense, kMood, kVoice, kDegree,
};
inline constexpr size_t kFeatureCount = 8;

std::string_view FeatureName(Feature feature);
std::span<const std::string_view> FeatureValues(Feature feature);

// Partial map from feature key to value. Values are stored as indices into
// the per-key inventory; ordering is lexicographic over keys in the fixed
// order, with absent keys sorting first.
class FeatureVector {
 public:
  FeatureVector() { values_.fill(-1); }

  bool empty() const;
  bool has(Feature feature) const { return values_[Index(feature)] >= 0; }
  std::optional<std::string_view> get(Feature feature) const;

  // Throws Error(kValidation) when the value is not in the inventory.
  FeatureVector& set(Feature feature, std::string_view value);
  FeatureVector& erase(Feature feature);

  // "case=nom;number=sg" in fixed key order; "_" for the empty vector.
  std::string ToString() const;
  // Accepts keys in any order; throws Error(kValidation) on unknown keys or
  // values and on repeated keys.
  static FeatureVector Parse(std::string_view text);

  auto operator<=>(const FeatureVector&) const = default;
  bool operator==(const FeatureVector&) const = default;

 private:
  static size_t Index(Feature f) { return static_cast<size_t>(f); }
  std::array<int8_t, kFeatureCount> values_;
};

// Checks the feature keys required (and forbidden) for a part of speech.
// The empty vector is always accepted: it denotes an uninflected entry.
// Throws Error(kValidation).
void ValidateFeatures(PosTag pos, const FeatureVector& features);

}  // namespace latinlex

#endif  // LATINLEX_FEATURES_H_
