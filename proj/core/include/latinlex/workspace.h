#ifndef LATINLEX_WORKSPACE_H_
#define LATINLEX_WORKSPACE_H_

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "latinlex/corpus_store.h"
#include "latinlex/embedding_space.h"
#include "latinlex/graphview.h"
#include "latinlex/lexicon.h"
#include "latinlex/training.h"

namespace latinlex {

// A workspace directory:
//   lexicon.json          lexicon snapshot
//   corpus.json           corpus snapshot
//   authors.txt           identities allowed to edit, one per line
//   spaces/manifest.json  trained spaces with their configs
//   spaces/<key>.vec      vectors (plus .ngrams for subword spaces)
struct SpaceRecord {
  SpaceKey key;
  std::string file;  // relative to spaces/
  std::string config_json;
  size_t vocabulary = 0;
  std::vector<double> epoch_loss;
};

class Workspace {
 public:
  // Loads what exists. With create, a missing directory is created and a
  // missing lexicon starts empty.
  static std::unique_ptr<Workspace> Open(const std::string& dir, bool create = true);

  const std::string& dir() const { return dir_; }
  Lexicon& lexicon() { return *lexicon_; }
  const Lexicon& lexicon() const { return *lexicon_; }
  CorpusStore& corpus() { return *corpus_; }
  const CorpusStore& corpus() const { return *corpus_; }

  // Loads the shipped paradigm tables and seed lexicon.
  void SeedLexicon(std::string_view author);

  void Save() const;  // lexicon.json and corpus.json
  std::mutex& save_mutex() const { return save_mu_; }

  // Editors allowed to mutate; empty file or no file: nobody.
  std::set<std::string> Authors() const;
  void AddAuthor(std::string_view author);

  // Layer ids: "reference", then every genre, then author layers of spaces.
  std::vector<std::string> Layers() const;

  std::vector<SpaceRecord> Spaces() const;
  bool HasSpace(const SpaceKey& key) const;
  // Error(kNotFound) for an unknown key. Loaded spaces are cached.
  std::shared_ptr<const EmbeddingSpace> Space(const SpaceKey& key) const;
  void StoreSpace(EmbeddingSpace space, const TrainingConfig& config, const TrainingStats& stats);

 private:
  Workspace() = default;
  void LoadManifest();
  void SaveManifestLocked() const;

  std::string dir_;
  std::unique_ptr<Lexicon> lexicon_;
  std::unique_ptr<CorpusStore> corpus_;
  mutable std::mutex save_mu_;
  mutable std::mutex spaces_mu_;
  std::map<SpaceKey, SpaceRecord> spaces_;
  mutable std::map<SpaceKey, std::shared_ptr<const EmbeddingSpace>> cache_;
};

struct TrainPlan {
  std::vector<std::string> layers;
  std::vector<std::string> methods;
  std::vector<Resolution> resolutions;
  TrainingConfig base;
  bool force = false;  // retrain keys already in the manifest
};

struct TrainOutcome {
  SpaceKey key;
  bool skipped = false;
  size_t vocabulary = 0;
  std::string error;  // set when the layer could not be trained
};

// Trains every (layer, method, resolution) of the plan and stores the
// spaces; keys already in the manifest are skipped unless forced, so an
// interrupted run resumes.
std::vector<TrainOutcome> TrainSpaces(Workspace& ws, const TrainPlan& plan,
                                      const std::function<void(const TrainOutcome&)>& progress = nullptr);

// Display form of a space symbol: entry ids become their forms.
std::string DisplayLabel(const Lexicon& lexicon, std::string_view symbol);

// Maps a user-typed seed to a vocabulary symbol: the symbol itself, or the
// entries of the space's resolution whose form matches (the most frequent
// in the space wins). Error(kNotFound) if nothing matches.
std::string ResolveSeed(const Lexicon& lexicon, const EmbeddingSpace& space, std::string_view seed);

// The first trained space (in key order) matching the given parts; empty
// parts match anything. A layer given alone may also name a whole space,
// as "legal-cbow-lemma" or "legal/cbow/lemma". Error(kNotFound) if none does.
SpaceKey SelectSpace(const Workspace& ws, std::string_view layer, std::string_view method,
                     std::string_view resolution);

// Graph view over a workspace space: the seed is resolved with ResolveSeed
// and nodes are labeled with DisplayLabel.
GraphView BuildWorkspaceGraph(const Workspace& ws, const SpaceKey& key, std::string_view seed,
                              size_t m, double threshold, bool star = false);

}  // namespace latinlex

#endif  // LATINLEX_WORKSPACE_H_
