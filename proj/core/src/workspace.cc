#include "latinlex/workspace.h"

#include <algorithm>
#include <filesystem>

#include "json.hpp"
#include "latinlex/error.h"
#include "latinlex/lexicon_io.h"
#include "latinlex/morphology.h"
#include "latinlex/text.h"

namespace latinlex {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string Path(const std::string& dir, std::string_view name) {
  return (fs::path(dir) / name).string();
}

}  // namespace

std::unique_ptr<Workspace> Workspace::Open(const std::string& dir, bool create) {
  if (!fs::is_directory(dir)) {
    if (!create) throw Error(ErrorCode::kNotFound, "workspace " + dir + " does not exist");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  }
  std::unique_ptr<Workspace> ws(new Workspace());
  ws->dir_ = dir;
  std::string lexicon_path = Path(dir, "lexicon.json");
  if (fs::exists(lexicon_path)) {
    ws->lexicon_ = LoadLexiconSnapshot(lexicon_path);
  } else {
    ws->lexicon_ = std::make_unique<Lexicon>();
  }
  std::string corpus_path = Path(dir, "corpus.json");
  if (fs::exists(corpus_path)) {
    ws->corpus_ = CorpusStore::Load(corpus_path, *ws->lexicon_);
  } else {
    ws->corpus_ = std::make_unique<CorpusStore>(*ws->lexicon_);
  }
  ws->corpus_->Attach();
  ws->LoadManifest();
  return ws;
}

void Workspace::SeedLexicon(std::string_view author) {
  const ParadigmRegistry& registry = ParadigmRegistry::Default();
  LoadSeedLexicon(*lexicon_, registry, Path(DefaultDataDir(), "seed_lexicon.tsv"), author);
}

void Workspace::Save() const {
  std::lock_guard lock(save_mu_);
  // Write to temporaries first so a crash never leaves half a snapshot.
  std::string lex = Path(dir_, "lexicon.json");
  std::string corpus = Path(dir_, "corpus.json");
  SaveLexiconSnapshot(*lexicon_, lex + ".tmp");
  corpus_->Save(corpus + ".tmp");
  fs::rename(lex + ".tmp", lex);
  fs::rename(corpus + ".tmp", corpus);
}

std::set<std::string> Workspace::Authors() const {
  std::set<std::string> out;
  std::string path = Path(dir_, "authors.txt");
  if (!fs::exists(path)) return out;
  for (const std::string& line : Split(ReadFile(path), '\n')) {
    std::string_view t = Trim(line);
    if (!t.empty() && t.front() != '#') out.emplace(t);
  }
  return out;
}

void Workspace::AddAuthor(std::string_view author) {
  std::string_view a = Trim(author);
  if (a.empty() || a.find_first_of("\n\r") != std::string_view::npos) {
    throw Error(ErrorCode::kValidation, "invalid author identity");
  }
  std::set<std::string> authors = Authors();
  if (!authors.emplace(a).second) return;
  std::string out;
  for (const auto& x : authors) out += x + "\n";
  WriteFile(Path(dir_, "authors.txt"), out);
}

std::vector<std::string> Workspace::Layers() const {
  std::vector<std::string> out = {"reference"};
  for (const auto& g : corpus_->Genres()) out.push_back(g);
  std::lock_guard lock(spaces_mu_);
  for (const auto& [key, rec] : spaces_) {
    if (std::find(out.begin(), out.end(), key.layer) == out.end()) out.push_back(key.layer);
  }
  return out;
}

void Workspace::LoadManifest() {
  std::string path = Path(Path(dir_, "spaces"), "manifest.json");
  if (!fs::exists(path)) return;
  try {
    ordered_json j = ordered_json::parse(ReadFile(path));
    for (const auto& js : j.at("spaces")) {
      SpaceRecord r;
      r.key = SpaceKey::Parse(js.at("key").get<std::string>());
      r.file = js.at("file").get<std::string>();
      r.config_json = js.at("config").dump();
      r.vocabulary = js.value("vocabulary", size_t{0});
      r.epoch_loss = js.value("epoch_loss", std::vector<double>{});
      spaces_[r.key] = std::move(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what(), path);
  }
}

void Workspace::SaveManifestLocked() const {
  ordered_json j;
  auto arr = ordered_json::array();
  for (const auto& [key, r] : spaces_) {
    ordered_json js;
    js["key"] = key.ToString();
    js["layer"] = key.layer;
    js["method"] = key.method;
    js["resolution"] = ResolutionName(key.resolution);
    js["file"] = r.file;
    js["config"] = ordered_json::parse(r.config_json);
    js["vocabulary"] = r.vocabulary;
    js["epoch_loss"] = r.epoch_loss;
    arr.push_back(std::move(js));
  }
  j["spaces"] = std::move(arr);
  WriteFile(Path(Path(dir_, "spaces"), "manifest.json"), j.dump(2) + "\n");
}

std::vector<SpaceRecord> Workspace::Spaces() const {
  std::lock_guard lock(spaces_mu_);
  std::vector<SpaceRecord> out;
  for (const auto& [key, r] : spaces_) out.push_back(r);
  return out;
}

bool Workspace::HasSpace(const SpaceKey& key) const {
  std::lock_guard lock(spaces_mu_);
  return spaces_.count(key) > 0;
}

std::shared_ptr<const EmbeddingSpace> Workspace::Space(const SpaceKey& key) const {
  std::lock_guard lock(spaces_mu_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  auto it = spaces_.find(key);
  if (it == spaces_.end()) {
    throw Error(ErrorCode::kNotFound, "no trained space " + key.ToString());
  }
  auto space = std::make_shared<EmbeddingSpace>(
      EmbeddingSpace::Load(Path(Path(dir_, "spaces"), it->second.file)));
  space->set_key(key);
  cache_[key] = space;
  return space;
}

void Workspace::StoreSpace(EmbeddingSpace space, const TrainingConfig& config,
                           const TrainingStats& stats) {
  std::string spaces_dir = Path(dir_, "spaces");
  fs::create_directories(spaces_dir);
  SpaceRecord r;
  r.key = space.key();
  r.file = r.key.FileStem() + ".vec";
  r.config_json = config.ToJson();
  r.vocabulary = space.size();
  r.epoch_loss = stats.epoch_loss;
  space.Save(Path(spaces_dir, r.file));
  std::lock_guard lock(spaces_mu_);
  cache_[r.key] = std::make_shared<EmbeddingSpace>(std::move(space));
  spaces_[r.key] = std::move(r);
  SaveManifestLocked();
}

std::vector<TrainOutcome> TrainSpaces(Workspace& ws, const TrainPlan& plan,
                                      const std::function<void(const TrainOutcome&)>& progress) {
  std::vector<TrainOutcome> out;
  for (const std::string& layer_id : plan.layers) {
    CorpusLayer layer = CorpusLayer::Parse(layer_id);
    for (Resolution resolution : plan.resolutions) {
      TrainingStream stream;
      bool built = false;
      for (const std::string& method : plan.methods) {
        TrainOutcome o;
        o.key = SpaceKey{layer.id, method, resolution};
        TrainingConfig config = ConfigForMethod(method, plan.base);
        if (!plan.force && ws.HasSpace(o.key)) {
          o.skipped = true;
        } else {
          if (!built) {
            stream = BuildTrainingStream(ws.corpus(), ws.lexicon(), layer, resolution);
            built = true;
          }
          try {
            TrainingStats stats;
            EmbeddingSpace space = TrainEmbedding(stream, config, &stats);
            space.set_key(o.key);
            o.vocabulary = space.size();
            ws.StoreSpace(std::move(space), config, stats);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kTraining) throw;
            o.error = e.what();
          }
        }
        if (progress) progress(o);
        out.push_back(std::move(o));
      }
    }
  }
  return out;
}

std::string DisplayLabel(const Lexicon& lexicon, std::string_view symbol) {
  std::string id(symbol);
  if (id.size() < 2 || !std::all_of(id.begin() + 1, id.end(), ::isdigit)) return id;
  switch (id[0]) {
    case 'S':
      if (auto s = lexicon.FindSuperlemma(id)) return s->form;
      break;
    case 'L':
      if (auto l = lexicon.FindLemma(id)) return l->form;
      break;
    case 'W':
      if (auto w = lexicon.FindSyntacticWord(id)) return w->wordform + " " + w->features.ToString();
      break;
  }
  return id;
}

std::string ResolveSeed(const Lexicon& lexicon, const EmbeddingSpace& space, std::string_view seed) {
  if (space.Contains(seed)) return std::string(seed);
  std::vector<std::string> ids;
  switch (space.key().resolution) {
    case Resolution::kWordform:
      try {
        ids.push_back(lexicon.Normalize(seed));
      } catch (const Error&) {
      }
      break;
    case Resolution::kSyntacticWord:
      ids = lexicon.LookupWordformIds(seed);
      break;
    case Resolution::kLemma:
      for (const Lemma& l : lexicon.FindLemmataByForm(seed)) ids.push_back(l.id);
      break;
    case Resolution::kSuperlemma:
      for (const Superlemma& s : lexicon.FindSuperlemmataByForm(seed)) ids.push_back(s.id);
      break;
  }
  std::optional<size_t> best;
  for (const auto& id : ids) {
    auto i = space.Find(id);
    if (i && (!best || *i < *best)) best = i;
  }
  if (!best) {
    throw Error(ErrorCode::kNotFound, "'" + std::string(seed) + "' is not in the vocabulary of " +
                                          space.key().ToString());
  }
  return space.vocabulary()[*best];
}

namespace {

std::optional<SpaceKey> FirstMatch(const std::vector<SpaceRecord>& spaces, std::string_view layer,
                                   std::string_view method, std::optional<Resolution> res) {
  std::string wanted_layer = layer.empty() ? std::string() : CorpusLayer::Parse(layer).id;
  for (const SpaceRecord& r : spaces) {
    if (!wanted_layer.empty() && r.key.layer != wanted_layer) continue;
    if (!method.empty() && r.key.method != method) continue;
    if (res && r.key.resolution != *res) continue;
    return r.key;
  }
  return std::nullopt;
}

}  // namespace

SpaceKey SelectSpace(const Workspace& ws, std::string_view layer, std::string_view method,
                     std::string_view resolution) {
  std::optional<Resolution> res;
  if (!resolution.empty()) res = ParseResolution(resolution);
  std::vector<SpaceRecord> spaces = ws.Spaces();
  if (auto key = FirstMatch(spaces, layer, method, res)) return *key;
  // Compound names: "legal-cbow-lemma" or "legal/cbow/lemma".
  if (method.empty() && resolution.empty()) {
    for (const SpaceRecord& r : spaces) {
      std::string dash = r.key.layer + "-" + r.key.method + "-" + std::string(ResolutionName(r.key.resolution));
      if (layer == dash || layer == r.key.ToString()) return r.key;
    }
  }
  throw Error(ErrorCode::kNotFound, "no trained space for layer '" + std::string(layer) +
                                        "', method '" + std::string(method) + "', resolution '" +
                                        std::string(resolution) + "'");
}

GraphView BuildWorkspaceGraph(const Workspace& ws, const SpaceKey& key, std::string_view seed,
                              size_t m, double threshold, bool star) {
  auto space = ws.Space(key);
  GraphViewSpec spec;
  spec.key = key;
  spec.seed = ResolveSeed(ws.lexicon(), *space, seed);
  spec.m = m;
  spec.threshold = threshold;
  spec.star = star;
  const Lexicon& lexicon = ws.lexicon();
  return BuildLocalGraphView(*space, spec,
                             [&](std::string_view symbol) { return DisplayLabel(lexicon, symbol); });
}

}  // namespace latinlex
