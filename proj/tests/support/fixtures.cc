#include "fixtures.h"

#include <stdlib.h>

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>

#include "latinlex/morphology.h"

namespace latinlex::testing {

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "latinlex-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string TempDir::File(const std::string& name) const {
  return (std::filesystem::path(path_) / name).string();
}

Clock SteppingClock() {
  auto t = std::make_shared<Timestamp>(ParseTimestamp("2019-05-01T12:00:00.000Z"));
  return [t] {
    *t += std::chrono::seconds(1);
    return *t;
  };
}

std::unique_ptr<Lexicon> SeededLexicon(Clock clock) {
  auto lexicon = std::make_unique<Lexicon>(Normalizer(), std::move(clock));
  LoadSeedLexicon(*lexicon, ParadigmRegistry::Default(), DefaultDataDir() + "/seed_lexicon.tsv",
                  "seed");
  return lexicon;
}

namespace {

const std::vector<std::string> kLegal = {
    "lex",   "iudex",      "causa",          "sententia", "ius",    "conclusio",
    "anathema", "excommunicatio", "iudico",  "excommunico", "dico", "scribo",
    "epistula", "episcopus", "ecclesia",     "iustus"};
const std::vector<std::string> kHistorical = {
    "rex",  "populus", "regnum", "terra", "filius", "frater", "mater", "senatus",
    "venio", "habeo",  "do",     "magnus", "bonus", "amicus", "servus", "dominus"};
const std::vector<std::string> kShared = {"pater", "pater", "sum", "et", "in", "non",
                                          "sed",   "cum",   "deus", "ad"};
const std::vector<std::string> kUnknown = {"caesar", "gallia", "marcus", "titus", "roma"};

std::string Capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::string Syllables(std::mt19937_64& rng, size_t n) {
  static const std::string consonants = "bcdfglmnprst";
  static const std::string vowels = "aeio";
  std::string out;
  for (size_t i = 0; i < n; ++i) {
    out += consonants[rng() % consonants.size()];
    out += vowels[rng() % vowels.size()];
  }
  return out;
}

}  // namespace

std::vector<DeskDocument> GenerateDeskCorpus(const Lexicon& lexicon, size_t documents,
                                             size_t words_per_document, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::map<std::string, std::vector<std::string>> forms;
  auto forms_of = [&](const std::string& lemma) -> const std::vector<std::string>& {
    auto it = forms.find(lemma);
    if (it != forms.end()) return it->second;
    std::set<std::string> unique;
    for (const Lemma& l : lexicon.FindLemmataByForm(lemma)) {
      for (const SyntacticWord& w : lexicon.SyntacticWordsOf(l.id)) unique.insert(w.wordform);
    }
    if (unique.empty()) throw std::runtime_error("desk corpus: no forms for " + lemma);
    // Frequent citation form, as in real text.
    std::vector<std::string> v(unique.begin(), unique.end());
    for (int i = 0; i < 4; ++i) v.push_back(lemma);
    return forms[lemma] = std::move(v);
  };

  std::vector<DeskDocument> out;
  for (size_t d = 0; d < documents; ++d) {
    bool legal = d % 2 == 0;
    const auto& genre_words = legal ? kLegal : kHistorical;
    DeskDocument doc;
    doc.title = (legal ? "legal-" : "historical-") + std::to_string(d + 1);
    doc.metadata.genre = legal ? "legal" : "historical";
    doc.metadata.author = legal ? (d % 4 == 0 ? "Gaius" : "Ulpianus") : (d % 4 == 1 ? "Livius" : "Tacitus");
    doc.metadata.date_from = legal ? 150 : 20;
    doc.metadata.date_to = legal ? 230 : 120;
    size_t words = 0;
    while (words < words_per_document) {
      size_t len = 6 + rng() % 7;
      for (size_t i = 0; i < len; ++i, ++words) {
        std::string w;
        double r = std::uniform_real_distribution<double>(0, 1)(rng);
        if (r < 0.03) {
          w = kUnknown[rng() % kUnknown.size()];
        } else if (r < 0.35) {
          const auto& v = forms_of(kShared[rng() % kShared.size()]);
          w = v[rng() % v.size()];
        } else {
          const auto& v = forms_of(genre_words[rng() % genre_words.size()]);
          w = v[rng() % v.size()];
        }
        if (i == 0) w = Capitalize(w);
        doc.text += w;
        if (i + 1 < len && rng() % 9 == 0) doc.text += ",";
        doc.text += i + 1 < len ? " " : ". ";
      }
    }
    doc.text.pop_back();
    doc.text += "\n";
    out.push_back(std::move(doc));
  }
  return out;
}

TrainingStream PlantedCommunities(size_t words_per_community, size_t sentences,
                                  size_t sentence_length, uint64_t seed) {
  std::mt19937_64 rng(seed);
  TrainingStream stream;
  for (size_t s = 0; s < sentences; ++s) {
    char community = s % 2 == 0 ? 'a' : 'b';
    std::vector<std::string> sentence;
    for (size_t i = 0; i < sentence_length; ++i) {
      sentence.push_back(community + std::to_string(rng() % words_per_community));
    }
    stream.push_back(std::move(sentence));
  }
  return stream;
}

std::vector<std::string> BuildRandomLexicon(Lexicon& lexicon, size_t entries, std::mt19937_64& rng) {
  static const char* kCases[] = {"nom", "gen", "dat", "acc", "abl", "voc"};
  static const char* kNumbers[] = {"sg", "pl"};
  std::set<std::string> pool_set;
  while (pool_set.size() < entries / 4) pool_set.insert(Syllables(rng, 2 + rng() % 2));
  std::vector<std::string> pool(pool_set.begin(), pool_set.end());

  size_t superlemmata = entries / 12;
  size_t lemmata = entries / 8;
  std::vector<EntryId> lemma_ids;
  std::set<std::string> used;
  for (size_t i = 0; i < superlemmata; ++i) {
    std::string form;
    do form = Syllables(rng, 3) + "us"; while (!used.insert(form).second);
    Superlemma s = lexicon.CreateSuperlemma(form, PosTag::kNN, "fixture");
    lemma_ids.push_back(lexicon.CreateLemma(s.id, form, "fixture").id);
  }
  std::vector<Superlemma> all = lexicon.Superlemmata();
  while (lemma_ids.size() < lemmata) {
    const Superlemma& s = all[rng() % all.size()];
    // Variant spellings get a distinct letter suffix per lemma.
    std::string suffix;
    for (size_t k = lemma_ids.size(); k > 0; k /= 26) suffix += static_cast<char>('a' + k % 26);
    lemma_ids.push_back(lexicon.CreateLemma(s.id, s.form + suffix, "fixture").id);
  }
  size_t words_needed = entries - superlemmata - lemmata;
  size_t added = 0;
  while (added < words_needed) {
    const EntryId& lemma = lemma_ids[rng() % lemma_ids.size()];
    NewForm f;
    f.wordform = pool[rng() % pool.size()];
    f.features = FeatureVector::Parse(std::string("case=") + kCases[rng() % 6] +
                                      ";number=" + kNumbers[rng() % 2]);
    added += lexicon.AddSyntacticWords(lemma, {f}, "fixture").created;
  }
  return pool;
}

std::string RandomText(const std::vector<std::string>& pool, size_t tokens, std::mt19937_64& rng) {
  std::string text;
  for (size_t i = 0; i < tokens; ++i) {
    unsigned r = rng() % 100;
    if (r < 8) {
      text += r < 4 ? ", " : ". ";
    } else if (r < 13) {
      text += "zq" + Syllables(rng, 2) + " ";
    } else {
      text += pool[rng() % pool.size()] + " ";
    }
  }
  return text + ".";
}

}  // namespace latinlex::testing
