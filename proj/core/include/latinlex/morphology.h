#ifndef LATINLEX_MORPHOLOGY_H_
#define LATINLEX_MORPHOLOGY_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latinlex/features.h"
#include "latinlex/lexicon.h"

namespace latinlex {

// How a cell's form is built. Parsed from the table's ending column:
//   stem+suffix   named stem (from the manifest stem rules) plus a suffix
//   @N            principal part N verbatim
//   =literal      a fixed form (irregular tables)
//   -             gap; requires gap_flag 1
struct Ending {
  enum class Kind { kStem, kPart, kLiteral, kGap };
  Kind kind = Kind::kGap;
  std::string stem;  // kStem
  std::string text;  // suffix (kStem) or literal (kLiteral)
  size_t part = 0;   // kPart

  static Ending Parse(std::string_view spec);
  std::string ToString() const;
};

struct ParadigmCell {
  FeatureVector features;
  Ending ending;
  bool gap = false;
};

// name=part:strip1|strip2 -- the stem is principal part `part` with the
// first matching strip suffix removed.
struct StemRule {
  std::string name;
  size_t part = 0;
  std::vector<std::string> strip;

  std::string ToString() const;
};

struct ParadigmClass {
  std::string id;
  std::vector<PosTag> pos;  // empty: any part of speech
  PosTag table_pos = PosTag::kXY;
  std::vector<std::string> part_names;
  std::vector<StemRule> stem_rules;
  std::string description;
  std::vector<ParadigmCell> cells;

  bool AcceptsPos(PosTag p) const;
};

struct ExpansionOptions {
  bool nominal_subparadigms = true;  // participles, gerundive, gerund, supine
  bool vocative = true;
};

// Loaded from <dir>/manifest.tsv and every <dir>/tables/*.tsv.
class ParadigmRegistry {
 public:
  // Throws Error(kParse) with a file:line location on malformed data, and
  // Error(kValidation) on inconsistent classes (invalid or repeated cell
  // keys, unknown stems, out-of-range parts).
  static ParadigmRegistry Load(const std::string& dir);
  static const ParadigmRegistry& Default();

  const ParadigmClass& Get(std::string_view id) const;  // Error(kNotFound)
  const ParadigmClass* Find(std::string_view id) const;
  std::vector<std::string> ClassIds() const;

 private:
  std::map<std::string, ParadigmClass, std::less<>> classes_;
};

// Directory of the shipped data: $LATINLEX_DATA_DIR if set, otherwise the
// source tree's data directory.
std::string DefaultDataDir();

// Candidate classes by ending heuristics; several candidates mean the caller
// must choose. Throws Error(kClassification) when no rule applies.
std::vector<std::string> ClassifyParadigm(PosTag pos, const std::vector<std::string>& parts);

// Pure generation: one NewForm per non-gap cell, in table order. Throws
// Error(kValidation) on a wrong number of parts and Error(kExpansion) when
// a stem rule does not match.
std::vector<NewForm> GenerateForms(const ParadigmClass& cls, const std::vector<std::string>& parts,
                                   const ExpansionOptions& options = {});

// Generates and stores the forms under an existing lemma. Re-expansion adds
// nothing new. Throws Error(kValidation) if the class does not fit the
// lemma's part of speech.
AddFormsResult ExpandLemma(Lexicon& lexicon, const EntryId& lemma_id, const ParadigmClass& cls,
                           const std::vector<std::string>& parts, std::string_view author,
                           const ExpansionOptions& options = {});

size_t EstimateExpansionSize(const ParadigmClass& cls, const ExpansionOptions& options = {});

// Seed file (TSV with header): superlemma pos lemma class parts. `class` is a
// class id, "auto" (ClassifyParadigm must return exactly one candidate) or
// "mwu" (parts are the components of a multi-word unit). Parts are
// comma-separated. Superlemmata and lemmata are reused when present, so
// loading a file twice adds nothing.
struct SeedReport {
  size_t rows = 0;
  size_t superlemmata = 0;
  size_t lemmata = 0;
  size_t syntactic_words = 0;
};

SeedReport LoadSeedLexicon(Lexicon& lexicon, const ParadigmRegistry& registry,
                           const std::string& path, std::string_view author,
                           const ExpansionOptions& options = {});

}  // namespace latinlex

#endif  // LATINLEX_MORPHOLOGY_H_
