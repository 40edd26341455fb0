#ifndef LATINLEX_EVALUATION_H_
#define LATINLEX_EVALUATION_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "latinlex/corpus_store.h"
#include "latinlex/lexicon.h"

namespace latinlex {

// One row of the CoNLL-like lemma file: surface TAB lemma TAB pos. An empty
// lemma or "_" means no lemma (unassigned prediction, or no gold label).
struct LemmaToken {
  std::string surface;
  std::string lemma;
  std::string pos;
  bool sentence_end = false;  // followed by a blank line

  bool operator==(const LemmaToken&) const = default;
};

// Blank lines separate sentences; lines starting with '#' are comments.
// Throws Error(kParse) with the line number on rows without a surface.
std::vector<LemmaToken> ParseLemmaTsv(std::string_view text);
std::vector<LemmaToken> ReadLemmaTsv(const std::string& path);
std::string FormatLemmaTsv(const std::vector<LemmaToken>& tokens);

// The document's word tokens with the lemma form of their chosen syntactic
// word (or no lemma). A multi-word unit's lemma is reported on every
// token it spans.
std::vector<LemmaToken> DocumentPredictions(const CorpusStore& store, const Lexicon& lexicon,
                                            std::string_view doc_id);

struct OverrideRule {
  std::string form;
  std::string predicted;
  std::string replacement;
  uint64_t hit_count = 0;
};

// TSV rows: form TAB predicted TAB replacement; an optional header row
// starting with "form" is skipped. Throws Error(kValidation) on a repeated
// (form, predicted) pair and Error(kParse) on malformed rows.
std::vector<OverrideRule> ParseOverrideTable(std::string_view text);
std::vector<OverrideRule> ReadOverrideTable(const std::string& path);

// Rewrites the lemma of every token whose exact surface and predicted lemma
// match a rule, counting hits on the rule. Everything else is copied.
std::vector<LemmaToken> ApplyOverrideTable(const std::vector<LemmaToken>& predictions,
                                           std::vector<OverrideRule>& table);

struct ConfusionEntry {
  std::string form;
  std::string gold;
  std::string predicted;
  uint64_t count = 0;
};

struct EvaluationReport {
  size_t tokens = 0;
  size_t assigned = 0;      // predictions with a lemma
  size_t gold_bearing = 0;  // gold rows with a lemma
  size_t correct = 0;       // assigned, gold-bearing and equal
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  // Wrong assignments grouped by (form, gold, predicted), count descending.
  std::vector<ConfusionEntry> confusions;

  std::string ToJson(size_t max_confusions = 50) const;
  std::string ToText(size_t max_confusions = 20) const;
};

// Tokens align by position. Throws Error(kValidation) on a length or
// surface mismatch.
EvaluationReport Evaluate(const std::vector<LemmaToken>& predictions,
                          const std::vector<LemmaToken>& gold);

}  // namespace latinlex

#endif  // LATINLEX_EVALUATION_H_
