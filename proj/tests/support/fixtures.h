#ifndef LATINLEX_TESTS_FIXTURES_H_
#define LATINLEX_TESTS_FIXTURES_H_

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "latinlex/corpus_store.h"
#include "latinlex/lexicon.h"
#include "latinlex/training.h"

namespace latinlex::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string File(const std::string& name) const;

 private:
  std::string path_;
};

// Clock advancing one second per call from 2019-05-01T12:00:00Z.
Clock SteppingClock();

// Lexicon loaded from the shipped seed file.
std::unique_ptr<Lexicon> SeededLexicon(Clock clock = SteppingClock());

struct DeskDocument {
  std::string title;
  std::string text;
  DocumentMetadata metadata;
};

// Deterministic desk corpus over the seed lexicon: documents alternate
// between the genres "legal" and "historical", each drawing most of its
// words from a genre vocabulary plus a shared core, with a sprinkling of
// names the lexicon does not know. "pater" is frequent in both genres.
std::vector<DeskDocument> GenerateDeskCorpus(const Lexicon& lexicon, size_t documents,
                                             size_t words_per_document, uint64_t seed);

// Two disjoint vocabularies (a0..a<n-1>, b0..b<n-1>); every sentence is drawn
// from one community only.
TrainingStream PlantedCommunities(size_t words_per_community, size_t sentences,
                                  size_t sentence_length, uint64_t seed);

// Random lexicon with `entries` entries in total. Wordforms come from a
// shared pool so most forms have several candidates across lemmata; all
// lemmata are nouns so any two can be merged. Returns the wordform pool.
std::vector<std::string> BuildRandomLexicon(Lexicon& lexicon, size_t entries, std::mt19937_64& rng);

// Text of `tokens` tokens (punctuation included) over the pool plus unknown
// forms.
std::string RandomText(const std::vector<std::string>& pool, size_t tokens, std::mt19937_64& rng);

}  // namespace latinlex::testing

#endif  // LATINLEX_TESTS_FIXTURES_H_
