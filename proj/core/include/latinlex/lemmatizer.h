#ifndef LATINLEX_LEMMATIZER_H_
#define LATINLEX_LEMMATIZER_H_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "latinlex/corpus_store.h"
#include "latinlex/lexicon.h"

namespace latinlex {

using FrequencyMap = std::map<EntryId, uint64_t, IdLess>;

struct LemmatizeOptions {
  // Evidence used to rank candidates. Null: the lexicon's stored corpus
  // frequencies.
  const FrequencyMap* frequencies = nullptr;
  bool multiword = true;
  // Top frequency must reach margin x runner-up for level 4.
  double margin = 2.0;
};

struct LemmatizeResult {
  std::string doc_id;
  size_t word_tokens = 0;
  size_t updated = 0;                // links changed in the store
  size_t multiword_matches = 0;
  std::array<size_t, 9> levels{};    // word tokens per level after the run
};

// Decides links for every word token of a snapshot without touching the
// store. Tokens at levels 6 to 8 get no proposal.
//
//   no candidates                     level 0
//   every candidate in one lemma      level 5, most frequent form chosen
//   top frequency 0                   level 2, nothing chosen
//   top >= margin * runner-up         level 4
//   otherwise                         level 3
//
// Frequency ties go to the earlier candidate in lookup order. Multi-word
// units are matched greedily, longest first, over adjacent word tokens and
// linked at level 5.
std::vector<AutoLink> ProposeLinks(const Lexicon& lexicon, const Document& doc,
                                   const LemmatizeOptions& options = {});

LemmatizeResult LemmatizeDocument(CorpusStore& store, const Lexicon& lexicon,
                                  const std::string& doc_id, const LemmatizeOptions& options = {});

// Lemmatizes every document of the layer on up to `threads` workers.
std::vector<LemmatizeResult> LemmatizeLayer(CorpusStore& store, const Lexicon& lexicon,
                                            const CorpusLayer& layer,
                                            const LemmatizeOptions& options = {},
                                            unsigned threads = 0);

// Two passes: the first links only what needs no frequency evidence
// (unambiguous forms, multi-word units), the counts of those links are
// stored as the lexicon's corpus frequencies, then the second pass
// disambiguates with them.
std::vector<LemmatizeResult> LemmatizeWithBootstrap(Lexicon& lexicon, CorpusStore& store,
                                                    std::string_view author,
                                                    unsigned threads = 0);

}  // namespace latinlex

#endif  // LATINLEX_LEMMATIZER_H_
