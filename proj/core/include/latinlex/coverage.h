#ifndef LATINLEX_COVERAGE_H_
#define LATINLEX_COVERAGE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latinlex/corpus_store.h"
#include "latinlex/lexicon.h"

namespace latinlex {

// Lexicon/corpus fit of one layer. Only word tokens are counted;
// punctuation is excluded from every denominator. A lexicon entry is used
// when at least one token links to it at level 3 or above.
struct CoverageReport {
  std::string layer;
  size_t token_total = 0;
  size_t tokens_mapped = 0;  // at least one candidate
  size_t tokens_unassigned = 0;
  size_t superlemmata_total = 0;
  size_t superlemmata_used = 0;
  size_t lemmata_total = 0;
  size_t lemmata_used = 0;
  size_t syntactic_words_total = 0;
  size_t syntactic_words_used = 0;
  // Percentages, rounded to 2 decimals.
  double tokens_mapped_pct = 0;
  double tokens_unassigned_pct = 0;
  double superlemmata_used_pct = 0;
  double lemmata_used_pct = 0;
  double syntactic_words_used_pct = 0;

  std::string ToJson() const;
  std::string ToText() const;
};

double RoundPercent(size_t part, size_t whole);

CoverageReport ComputeCoverage(const CorpusStore& store, const Lexicon& lexicon,
                               const CorpusLayer& layer);

struct CurvePoint {
  double percent = 0;
  std::optional<size_t> count;  // empty: unreachable with this lexicon
  double achieved = 0;          // token share of the prefix, in percent
  bool terminal = false;        // the closing point at maximum coverage
};

// Pure form of the curve. weights are token counts per used syntactic word
// (any order), total is the word-token denominator. For each p of the grid,
// count is the smallest number of syntactic words whose token share reaches
// p percent; taking the most frequent first gives that minimum. A terminal
// point at the maximum achievable share (count = number of non-zero
// weights) closes the curve whenever any token is covered.
std::vector<CurvePoint> CurveFromWeights(std::vector<uint64_t> weights, uint64_t total,
                                         const std::vector<double>& grid);

// 1, 2, ..., 100.
std::vector<double> DefaultPercentGrid();

// Weights are the tokens linked (level 3 and above) to each syntactic word;
// every token of a multi-word unit counts.
std::vector<CurvePoint> CoverageCurve(const CorpusStore& store, const Lexicon& lexicon,
                                      const CorpusLayer& layer, const std::vector<double>& grid);

std::string CurveToJson(const std::string& layer, const std::vector<CurvePoint>& curve);

}  // namespace latinlex

#endif  // LATINLEX_COVERAGE_H_
