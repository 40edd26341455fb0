#include "latinlex/features.h"

#include <algorithm>
#include <initializer_list>

#include "latinlex/error.h"
#include "latinlex/text.h"

namespace latinlex {
namespace {

constexpr std::array<std::string_view, kPosTagCount> kPosNames = {
    "ADJ", "ADV", "AP", "CON", "DIST", "FM", "ITJ", "NE",
    "NN", "NP", "NUM", "ORD", "PRO", "PTC", "V", "XY",
};

constexpr std::array<PosTag, kPosTagCount> kAllPos = {
    PosTag::kADJ, PosTag::kADV, PosTag::kAP, PosTag::kCON, PosTag::kDIST, PosTag::kFM,
    PosTag::kITJ, PosTag::kNE, PosTag::kNN, PosTag::kNP, PosTag::kNUM, PosTag::kORD,
    PosTag::kPRO, PosTag::kPTC, PosTag::kV, PosTag::kXY,
};

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "case", "number", "gender", "person", "tense", "mood", "voice", "degree",
};

constexpr std::array<std::string_view, 6> kCaseValues = {"nom", "gen", "dat", "acc", "abl", "voc"};
constexpr std::array<std::string_view, 2> kNumberValues = {"sg", "pl"};
constexpr std::array<std::string_view, 3> kGenderValues = {"m", "f", "n"};
constexpr std::array<std::string_view, 3> kPersonValues = {"1", "2", "3"};
constexpr std::array<std::string_view, 6> kTenseValues = {"pres", "impf", "fut",
                                                          "perf", "plup", "futperf"};
constexpr std::array<std::string_view, 8> kMoodValues = {"ind", "subj", "imp", "inf",
                                                         "part", "ger", "gerundive", "supine"};
constexpr std::array<std::string_view, 2> kVoiceValues = {"act", "pass"};
constexpr std::array<std::string_view, 3> kDegreeValues = {"pos", "comp", "sup"};

Feature FeatureFromName(std::string_view name) {
  for (size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  }
  throw Error(ErrorCode::kValidation, "unknown feature key '" + std::string(name) + "'");
}

void Require(PosTag pos, const FeatureVector& fv, std::initializer_list<Feature> keys,
             std::string_view what) {
  for (Feature f : keys) {
    if (!fv.has(f)) {
      throw Error(ErrorCode::kValidation,
                  std::string(PosTagName(pos)) + " " + std::string(what) + " requires " +
                      std::string(FeatureName(f)) + " (got " + fv.ToString() + ")");
    }
  }
}

void Forbid(PosTag pos, const FeatureVector& fv, std::initializer_list<Feature> keys) {
  for (Feature f : keys) {
    if (fv.has(f)) {
      throw Error(ErrorCode::kValidation, std::string(PosTagName(pos)) + " does not take " +
                                              std::string(FeatureName(f)) + " (got " +
                                              fv.ToString() + ")");
    }
  }
}

}  // namespace

std::string_view PosTagName(PosTag pos) { return kPosNames[static_cast<size_t>(pos)]; }

PosTag ParsePosTag(std::string_view code) {
  for (size_t i = 0; i < kPosTagCount; ++i) {
    if (kPosNames[i] == code) return kAllPos[i];
  }
  throw Error(ErrorCode::kValidation, "invalid part of speech '" + std::string(code) + "'");
}

std::span<const PosTag> AllPosTags() { return kAllPos; }

std::string_view FeatureName(Feature feature) {
  return kFeatureNames[static_cast<size_t>(feature)];
}

std::span<const std::string_view> FeatureValues(Feature feature) {
  switch (feature) {
    case Feature::kCase: return kCaseValues;
    case Feature::kNumber: return kNumberValues;
    case Feature::kGender: return kGenderValues;
    case Feature::kPerson: return kPersonValues;
    case Feature::kTense: return kTenseValues;
    case Feature::kMood: return kMoodValues;
    case Feature::kVoice: return kVoiceValues;
    case Feature::kDegree: return kDegreeValues;
  }
  return {};
}

bool FeatureVector::empty() const {
  return std::all_of(values_.begin(), values_.end(), [](int8_t v) { return v < 0; });
}

std::optional<std::string_view> FeatureVector::get(Feature feature) const {
  int8_t v = values_[Index(feature)];
  if (v < 0) return std::nullopt;
  return FeatureValues(feature)[v];
}

FeatureVector& FeatureVector::set(Feature feature, std::string_view value) {
  auto values = FeatureValues(feature);
  auto it = std::find(values.begin(), values.end(), value);
  if (it == values.end()) {
    throw Error(ErrorCode::kValidation, "invalid value '" + std::string(value) +
                                            "' for feature " + std::string(FeatureName(feature)));
  }
  values_[Index(feature)] = static_cast<int8_t>(it - values.begin());
  return *this;
}

FeatureVector& FeatureVector::erase(Feature feature) {
  values_[Index(feature)] = -1;
  return *this;
}

std::string FeatureVector::ToString() const {
  std::string out;
  for (size_t i = 0; i < kFeatureCount; ++i) {
    if (values_[i] < 0) continue;
    if (!out.empty()) out += ';';
    auto f = static_cast<Feature>(i);
    out += FeatureName(f);
    out += '=';
    out += FeatureValues(f)[values_[i]];
  }
  return out.empty() ? "_" : out;
}

FeatureVector FeatureVector::Parse(std::string_view text) {
  FeatureVector fv;
  text = Trim(text);
  if (text.empty() || text == "_") return fv;
  for (const std::string& item : Split(text, ';')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kValidation, "malformed feature '" + item + "'");
    }
    Feature f = FeatureFromName(item.substr(0, eq));
    if (fv.has(f)) {
      throw Error(ErrorCode::kValidation,
                  "repeated feature key '" + std::string(FeatureName(f)) + "'");
    }
    fv.set(f, item.substr(eq + 1));
  }
  return fv;
}

void ValidateFeatures(PosTag pos, const FeatureVector& fv) {
  if (fv.empty()) return;
  using F = Feature;
  switch (pos) {
    case PosTag::kNN:
    case PosTag::kNE:
    case PosTag::kNP:
      Require(pos, fv, {F::kCase, F::kNumber}, "form");
      Forbid(pos, fv, {F::kPerson, F::kTense, F::kMood, F::kVoice, F::kDegree});
      return;
    case PosTag::kADJ:
      Require(pos, fv, {F::kCase, F::kNumber, F::kGender}, "form");
      Forbid(pos, fv, {F::kPerson, F::kTense, F::kMood, F::kVoice});
      return;
    case PosTag::kADV:
      Forbid(pos, fv, {F::kCase, F::kNumber, F::kGender, F::kPerson, F::kTense, F::kMood,
                       F::kVoice});
      return;
    case PosTag::kV: {
      Require(pos, fv, {F::kMood}, "form");
      std::string_view mood = *fv.get(F::kMood);
      if (mood == "ind" || mood == "subj" || mood == "imp") {
        Require(pos, fv, {F::kPerson, F::kNumber, F::kTense, F::kVoice}, "finite form");
        Forbid(pos, fv, {F::kCase, F::kGender, F::kDegree});
      } else if (mood == "inf") {
        Require(pos, fv, {F::kTense, F::kVoice}, "infinitive");
        Forbid(pos, fv, {F::kCase, F::kNumber, F::kGender, F::kPerson, F::kDegree});
      } else if (mood == "part") {
        Require(pos, fv, {F::kCase, F::kNumber, F::kGender, F::kTense, F::kVoice}, "participle");
        Forbid(pos, fv, {F::kPerson});
      } else if (mood == "gerundive") {
        Require(pos, fv, {F::kCase, F::kNumber, F::kGender}, "gerundive");
        Forbid(pos, fv, {F::kPerson, F::kTense, F::kDegree});
      } else {  // gerund, supine
        Require(pos, fv, {F::kCase}, "verbal noun");
        Forbid(pos, fv, {F::kNumber, F::kGender, F::kPerson, F::kTense, F::kDegree});
      }
      return;
    }
    case PosTag::kPRO:
    case PosTag::kNUM:
    case PosTag::kORD:
    case PosTag::kDIST:
      Forbid(pos, fv, {F::kTense, F::kMood, F::kVoice});
      return;
    default:
      // Particles, conjunctions, prepositions, interjections, foreign
      // material and unknowns are uninflected.
      throw Error(ErrorCode::kValidation,
                  std::string(PosTagName(pos)) + " entries take no features");
  }
}

}  // namespace latinlex
