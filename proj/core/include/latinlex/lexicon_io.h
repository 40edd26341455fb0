#ifndef LATINLEX_LEXICON_IO_H_
#define LATINLEX_LEXICON_IO_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "latinlex/lexicon.h"

namespace latinlex {

// Exchange formats.
//
// TSV (UTF-8, header row):
//   superlemma_id superlemma pos lemma_id lemma double_checked sw_id wordform
//   features frequency
// One row per syntactic word; childless superlemmata and lemmata are rows
// with the lower columns left empty. Features use FeatureVector::ToString.
//
// JSONL: one object per row with nested "superlemma", "lemma" and
// "syntactic_word" objects (the latter two may be null).
enum class ExchangeFormat { kTsv, kJsonl };

ExchangeFormat ParseExchangeFormat(std::string_view name);
inline constexpr std::string_view kLexiconTsvHeader =
    "superlemma_id\tsuperlemma\tpos\tlemma_id\tlemma\tdouble_checked\tsw_id\twordform\t"
    "features\tfrequency";

struct ImportRejection {
  size_t line = 0;  // 1-based, counting the header
  std::string reason;
};

struct ImportReport {
  size_t rows = 0;
  size_t accepted = 0;
  size_t superlemmata = 0;  // newly created entries per level
  size_t lemmata = 0;
  size_t syntactic_words = 0;
  std::vector<ImportRejection> rejections;
};

// Malformed or conflicting rows are recorded in the report and skipped; the
// import never aborts on a bad row. Throws Error(kIo) if the file cannot be
// read.
ImportReport ImportLexicon(Lexicon& lexicon, const std::string& path, ExchangeFormat format,
                           std::string_view author);
ImportReport ImportLexiconText(Lexicon& lexicon, std::string_view content, ExchangeFormat format,
                               std::string_view author, std::string_view source = "<memory>");

// Returns the number of data rows written.
size_t ExportLexicon(const Lexicon& lexicon, const std::string& path, ExchangeFormat format);
std::string ExportLexiconText(const Lexicon& lexicon, ExchangeFormat format,
                              size_t* rows = nullptr);

// Full state (entries, audit log, multi-word units, id counters and fold
// table) as one JSON document.
void SaveLexiconSnapshot(const Lexicon& lexicon, const std::string& path);
std::unique_ptr<Lexicon> LoadLexiconSnapshot(const std::string& path, Clock clock = SystemNow);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view content);

}  // namespace latinlex

#endif  // LATINLEX_LEXICON_IO_H_
