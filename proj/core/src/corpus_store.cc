#include "latinlex/corpus_store.h"

#include <algorithm>
#include <iostream>
#include <mutex>

#include "json.hpp"
#include "latinlex/error.h"
#include "latinlex/lexicon_io.h"
#include "latinlex/tei.h"

namespace latinlex {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr size_t kSyncLogLimit = 1000;

std::optional<int> OptionalInt(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) {
    throw Error(ErrorCode::kParse, std::string("metadata field ") + key + " must be an integer");
  }
  return it->get<int>();
}

std::string OptionalString(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw Error(ErrorCode::kParse, std::string("metadata field ") + key + " must be a string");
  }
  return it->get<std::string>();
}

ordered_json MetadataJson(const DocumentMetadata& m) {
  ordered_json j;
  j["genre"] = m.genre;
  j["author"] = m.author;
  j["date_from"] = m.date_from ? ordered_json(*m.date_from) : ordered_json(nullptr);
  j["date_to"] = m.date_to ? ordered_json(*m.date_to) : ordered_json(nullptr);
  return j;
}

DocumentMetadata MetadataFromJson(const ordered_json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "metadata must be a JSON object");
  DocumentMetadata m;
  m.genre = OptionalString(j, "genre");
  m.author = OptionalString(j, "author");
  m.date_from = OptionalInt(j, "date_from");
  m.date_to = OptionalInt(j, "date_to");
  if (m.date_from && m.date_to && *m.date_from > *m.date_to) {
    throw Error(ErrorCode::kValidation, "date_from is after date_to");
  }
  return m;
}

}  // namespace

std::string_view SourceFormatName(SourceFormat format) {
  return format == SourceFormat::kTei ? "tei" : "plain";
}

SourceFormat ParseSourceFormat(std::string_view name) {
  if (name == "plain" || name == "txt" || name == "text") return SourceFormat::kPlain;
  if (name == "tei" || name == "xml") return SourceFormat::kTei;
  throw Error(ErrorCode::kValidation, "unknown source format '" + std::string(name) + "'");
}

DocumentMetadata DocumentMetadata::FromJson(std::string_view json) {
  ordered_json j;
  try {
    j = ordered_json::parse(json);
  } catch (const ordered_json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("metadata: ") + e.what());
  }
  return MetadataFromJson(j);
}

std::string DocumentMetadata::ToJson() const { return MetadataJson(*this).dump(); }

std::string_view AnnotationLevelName(AnnotationLevel level) {
  switch (level) {
    case AnnotationLevel::kUnknown: return "unknown";
    case AnnotationLevel::kSuspect: return "suspect";
    case AnnotationLevel::kUndecided: return "undecided";
    case AnnotationLevel::kAutoLow: return "auto-low";
    case AnnotationLevel::kAutoHigh: return "auto-high";
    case AnnotationLevel::kUnambiguous: return "unambiguous";
    case AnnotationLevel::kConfirmed: return "confirmed";
    case AnnotationLevel::kCorrected: return "corrected";
    case AnnotationLevel::kDoubleChecked: return "double-checked";
  }
  return "?";
}

CorpusLayer CorpusLayer::Parse(std::string_view id) {
  CorpusLayer layer;
  layer.id = std::string(id);
  if (id.empty() || id == "reference" || id == "all") {
    layer.id = "reference";
    return layer;
  }
  if (id.starts_with("author:")) {
    layer.kind = Kind::kAuthor;
    layer.value = std::string(id.substr(7));
  } else if (id.starts_with("genre:")) {
    layer.kind = Kind::kGenre;
    layer.value = std::string(id.substr(6));
    layer.id = layer.value;
  } else {
    layer.kind = Kind::kGenre;
    layer.value = std::string(id);
  }
  if (layer.value.empty()) {
    throw Error(ErrorCode::kValidation, "empty layer selector '" + std::string(id) + "'");
  }
  return layer;
}

bool CorpusLayer::Selects(const DocumentMetadata& metadata) const {
  switch (kind) {
    case Kind::kAll: return true;
    case Kind::kGenre: return metadata.genre == value;
    case Kind::kAuthor: return metadata.author == value;
  }
  return false;
}

std::string_view LinkActionName(LinkAction action) {
  switch (action) {
    case LinkAction::kConfirm: return "confirm";
    case LinkAction::kCorrect: return "correct";
    case LinkAction::kCreate: return "create";
    case LinkAction::kDoubleCheck: return "double_check";
  }
  return "?";
}

LinkAction ParseLinkAction(std::string_view name) {
  if (name == "confirm") return LinkAction::kConfirm;
  if (name == "correct") return LinkAction::kCorrect;
  if (name == "create") return LinkAction::kCreate;
  if (name == "double_check" || name == "double-check") return LinkAction::kDoubleCheck;
  throw Error(ErrorCode::kValidation, "unknown link action '" + std::string(name) + "'");
}

CorpusStore::CorpusStore(const Lexicon& lexicon, Clock clock)
    : lexicon_(lexicon), clock_(std::move(clock)) {}

CorpusStore::~CorpusStore() { Detach(); }

void CorpusStore::Attach() {
  std::unique_lock lock(mu_);
  if (subscription_) return;
  last_seq_ = std::max(last_seq_, lexicon_.LastEventSeq());
  subscription_ = const_cast<Lexicon&>(lexicon_).Subscribe([this](const LexiconEvent& e) {
    try {
      ApplyLexiconUpdate(e);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kSync) throw;
    }
  });
}

void CorpusStore::Detach() {
  std::optional<uint64_t> handle;
  {
    std::unique_lock lock(mu_);
    handle.swap(subscription_);
  }
  if (handle) const_cast<Lexicon&>(lexicon_).Unsubscribe(*handle);
}

Document CorpusStore::Ingest(std::string_view bytes, SourceFormat format,
                             const DocumentMetadata& metadata, std::string_view title) {
  Document doc;
  doc.title = std::string(title);
  doc.source = format;
  doc.metadata = metadata;
  doc.text = format == SourceFormat::kTei ? ExtractTeiBodyText(bytes) : std::string(bytes);
  std::vector<RawToken> raw = Tokenize(doc.text);
  doc.tokens.reserve(raw.size());
  for (RawToken& r : raw) {
    Token t;
    t.surface = std::move(r.surface);
    t.begin = r.begin;
    t.end = r.end;
    t.is_word = r.is_word;
    doc.tokens.push_back(std::move(t));
  }

  // Lookups happen under the store lock so that no event can slip between
  // a lookup and the document becoming visible to event handling.
  std::unique_lock lock(mu_);
  doc.id = "D" + std::to_string(next_doc_++);
  if (doc.title.empty()) doc.title = doc.id;
  std::unordered_map<std::string, std::vector<EntryId>> cache;
  for (Token& t : doc.tokens) {
    if (!t.is_word) continue;
    auto [it, fresh] = cache.try_emplace(t.surface);
    if (fresh) it->second = lexicon_.LookupWordformIds(t.surface);
    t.link.candidates = it->second;
  }
  auto index = static_cast<uint32_t>(docs_.size());
  docs_.push_back(doc);
  doc_ids_[doc.id] = index;
  IndexDocument(index);
  return doc;
}

void CorpusStore::IndexDocument(uint32_t doc_index) {
  Document& doc = docs_[doc_index];
  for (uint32_t i = 0; i < doc.tokens.size(); ++i) {
    const Token& t = doc.tokens[i];
    if (!t.is_word) continue;
    surface_index_[lexicon_.Normalize(t.surface)].push_back({doc_index, i});
    if (t.link.chosen) chosen_index_[*t.link.chosen].insert({doc_index, i});
  }
}

void CorpusStore::SetChosen(TokenRef ref, std::optional<EntryId> chosen) {
  TokenLink& link = docs_[ref.doc].tokens[ref.token].link;
  if (link.chosen == chosen) return;
  if (link.chosen) {
    auto it = chosen_index_.find(*link.chosen);
    if (it != chosen_index_.end()) {
      it->second.erase(ref);
      if (it->second.empty()) chosen_index_.erase(it);
    }
  }
  link.chosen = std::move(chosen);
  if (link.chosen) chosen_index_[*link.chosen].insert(ref);
}

uint32_t CorpusStore::DocIndex(std::string_view id) const {
  auto it = doc_ids_.find(std::string(id));
  if (it == doc_ids_.end()) {
    throw Error(ErrorCode::kNotFound, "document " + std::string(id) + " does not exist");
  }
  return it->second;
}

std::optional<Document> CorpusStore::FindDocument(std::string_view id) const {
  std::shared_lock lock(mu_);
  auto it = doc_ids_.find(std::string(id));
  if (it == doc_ids_.end()) return std::nullopt;
  return docs_[it->second];
}

Document CorpusStore::GetDocument(std::string_view id) const {
  std::shared_lock lock(mu_);
  return docs_[DocIndex(id)];
}

std::vector<DocumentSummary> CorpusStore::ListDocuments() const {
  std::shared_lock lock(mu_);
  std::vector<DocumentSummary> out;
  for (const auto& [id, index] : doc_ids_) {
    const Document& d = docs_[index];
    DocumentSummary s{d.id, d.title, d.metadata, d.tokens.size(), 0};
    for (const Token& t : d.tokens) s.word_tokens += t.is_word ? 1 : 0;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> CorpusStore::DocumentIds(const CorpusLayer& layer) const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, index] : doc_ids_) {
    if (layer.Selects(docs_[index].metadata)) out.push_back(id);
  }
  return out;
}

std::vector<std::string> CorpusStore::Genres() const {
  std::shared_lock lock(mu_);
  std::set<std::string> genres;
  for (const Document& d : docs_) {
    if (!d.metadata.genre.empty()) genres.insert(d.metadata.genre);
  }
  return {genres.begin(), genres.end()};
}

std::vector<std::string> CorpusStore::Authors() const {
  std::shared_lock lock(mu_);
  std::set<std::string> authors;
  for (const Document& d : docs_) {
    if (!d.metadata.author.empty()) authors.insert(d.metadata.author);
  }
  return {authors.begin(), authors.end()};
}

size_t CorpusStore::DocumentCount() const {
  std::shared_lock lock(mu_);
  return docs_.size();
}

void CorpusStore::ForEachDocument(const CorpusLayer& layer,
                                  const std::function<void(const Document&)>& fn) const {
  std::shared_lock lock(mu_);
  for (const auto& [id, index] : doc_ids_) {
    if (layer.Selects(docs_[index].metadata)) fn(docs_[index]);
  }
}

size_t CorpusStore::TokenCount() const {
  std::shared_lock lock(mu_);
  size_t n = 0;
  for (const Document& d : docs_) n += d.tokens.size();
  return n;
}

TokenLink CorpusStore::LinkToken(std::string_view doc_id, size_t token_index,
                                 const EntryId& chosen, std::string_view editor,
                                 LinkAction action) {
  if (editor.empty()) throw Error(ErrorCode::kValidation, "editor identity is required");
  if (KindOf(chosen) != EntryKind::kSyntacticWord || !lexicon_.FindSyntacticWord(chosen)) {
    throw Error(ErrorCode::kNotFound, "syntactic word " + chosen + " does not exist");
  }
  std::unique_lock lock(mu_);
  uint32_t d = DocIndex(doc_id);
  Document& doc = docs_[d];
  if (token_index >= doc.tokens.size()) {
    throw Error(ErrorCode::kNotFound, "token " + std::to_string(token_index) + " is out of range in " +
                                          doc.id);
  }
  Token& token = doc.tokens[token_index];
  if (!token.is_word) {
    throw Error(ErrorCode::kValidation, "token " + std::to_string(token_index) + " is punctuation");
  }
  TokenLink& link = token.link;
  bool listed = std::find(link.candidates.begin(), link.candidates.end(), chosen) !=
                link.candidates.end();
  switch (action) {
    case LinkAction::kConfirm:
      if (!listed) {
        throw Error(ErrorCode::kValidation, chosen + " is not a candidate of token " +
                                                std::to_string(token_index));
      }
      link.level = AnnotationLevel::kConfirmed;
      break;
    case LinkAction::kCorrect:
      if (!listed && link.mwu == MwuRole::kNone) {
        throw Error(ErrorCode::kValidation, chosen + " is not a candidate of token " +
                                                std::to_string(token_index));
      }
      link.level = AnnotationLevel::kCorrected;
      break;
    case LinkAction::kCreate: {
      // The new entry must carry the token's wordform; it normally arrives
      // through the create event already, but the link may race ahead of it.
      auto word = lexicon_.FindSyntacticWord(chosen);
      if (word->wordform != lexicon_.Normalize(token.surface)) {
        throw Error(ErrorCode::kValidation, "new entry " + chosen + " has wordform '" +
                                                word->wordform + "', token is '" + token.surface +
                                                "'");
      }
      if (!listed) link.candidates = lexicon_.LookupWordformIds(token.surface);
      link.level = AnnotationLevel::kCorrected;
      break;
    }
    case LinkAction::kDoubleCheck:
      if (LevelValue(link.level) < kFirstHumanLevel || link.chosen != chosen) {
        throw Error(ErrorCode::kConstraint,
                    "double check requires an editor-set link to " + chosen);
      }
      link.level = AnnotationLevel::kDoubleChecked;
      break;
  }
  if (action == LinkAction::kCorrect || action == LinkAction::kCreate) {
    if (link.chosen != chosen) link.mwu = MwuRole::kNone;
  }
  SetChosen({d, static_cast<uint32_t>(token_index)}, chosen);
  link.editor = std::string(editor);
  link.timestamp = clock_();
  return link;
}

size_t CorpusStore::ApplyAutoLinks(std::string_view doc_id, const std::vector<AutoLink>& links) {
  std::unique_lock lock(mu_);
  uint32_t d = DocIndex(doc_id);
  Document& doc = docs_[d];
  size_t changed = 0;
  for (const AutoLink& a : links) {
    if (a.token >= doc.tokens.size()) {
      throw Error(ErrorCode::kValidation, "token " + std::to_string(a.token) + " is out of range");
    }
    if (LevelValue(a.level) >= kFirstHumanLevel) {
      throw Error(ErrorCode::kConstraint, "automatic links cannot set level " +
                                              std::to_string(LevelValue(a.level)));
    }
  }
  for (const AutoLink& a : links) {
    TokenLink& link = doc.tokens[a.token].link;
    if (LevelValue(link.level) >= kFirstHumanLevel) continue;
    if (link.chosen == a.chosen && link.level == a.level && link.mwu == a.mwu) continue;
    SetChosen({d, static_cast<uint32_t>(a.token)}, a.chosen);
    link.level = a.level;
    link.mwu = a.mwu;
    link.editor.clear();
    link.timestamp.reset();
    ++changed;
  }
  return changed;
}

SyncReport CorpusStore::ApplyLexiconUpdate(const LexiconEvent& event) {
  std::unique_lock lock(mu_);
  if (event.seq <= last_seq_) {
    SyncReport ignored;
    ignored.event_seq = event.seq;
    ignored.kind = event.kind;
    return ignored;
  }
  if (event.seq > last_seq_ + 1) {
    parked_.try_emplace(event.seq, event);
    throw Error(ErrorCode::kSync, "event " + std::to_string(event.seq) + " arrived before event " +
                                      std::to_string(last_seq_ + 1) + "; parked");
  }
  SyncReport report = ApplyLocked(event);
  DrainParkedLocked();
  return report;
}

std::vector<SyncReport> CorpusStore::CatchUp() {
  std::vector<LexiconEvent> events = lexicon_.Events();
  std::unique_lock lock(mu_);
  std::vector<SyncReport> out;
  for (const LexiconEvent& e : events) {
    if (e.seq <= last_seq_) continue;
    if (e.seq != last_seq_ + 1) break;  // the log itself has a hole
    out.push_back(ApplyLocked(e));
  }
  for (SyncReport& r : DrainParkedLocked()) out.push_back(std::move(r));
  return out;
}

std::vector<SyncReport> CorpusStore::DrainParkedLocked() {
  std::vector<SyncReport> out;
  while (!parked_.empty()) {
    auto it = parked_.begin();
    if (it->first <= last_seq_) {
      parked_.erase(it);
      continue;
    }
    if (it->first != last_seq_ + 1) break;
    LexiconEvent e = std::move(it->second);
    parked_.erase(it);
    out.push_back(ApplyLocked(e));
  }
  return out;
}

SyncReport CorpusStore::ApplyLocked(const LexiconEvent& event) {
  SyncReport report;
  report.event_seq = event.seq;
  report.kind = event.kind;
  std::set<TokenRef> touched;

  for (const std::string& wordform : event.affected_wordforms) {
    auto it = surface_index_.find(wordform);
    if (it == surface_index_.end()) continue;
    std::vector<EntryId> fresh = lexicon_.LookupWordformIds(wordform);
    for (TokenRef ref : it->second) {
      TokenLink& link = docs_[ref.doc].tokens[ref.token].link;
      if (link.candidates == fresh) continue;
      link.candidates = fresh;
      ++report.candidates_rewritten;
      touched.insert(ref);
    }
  }

  for (const auto& [from, to] : event.remap) {
    auto it = chosen_index_.find(from);
    if (it == chosen_index_.end()) continue;
    std::vector<TokenRef> refs(it->second.begin(), it->second.end());
    for (TokenRef ref : refs) {
      SetChosen(ref, to);
      ++report.links_remapped;
      touched.insert(ref);
    }
  }

  for (const EntryId& id : event.removed) {
    if (event.remap.count(id)) continue;
    auto it = chosen_index_.find(id);
    if (it == chosen_index_.end()) continue;
    std::vector<TokenRef> refs(it->second.begin(), it->second.end());
    for (TokenRef ref : refs) {
      TokenLink& link = docs_[ref.doc].tokens[ref.token].link;
      SetChosen(ref, std::nullopt);
      link.level = AnnotationLevel::kUndecided;
      link.mwu = MwuRole::kNone;
      link.editor.clear();
      link.timestamp.reset();
      ++report.links_downgraded;
      touched.insert(ref);
    }
  }

  for (TokenRef ref : touched) ++report.touched_per_document[docs_[ref.doc].id];
  report.touched = touched.size();
  last_seq_ = event.seq;
  sync_log_.push_back(report);
  if (sync_log_.size() > kSyncLogLimit) {
    sync_log_.erase(sync_log_.begin(), sync_log_.begin() + (sync_log_.size() - kSyncLogLimit));
  }
  return report;
}

size_t CorpusStore::ParkedCount() const {
  std::shared_lock lock(mu_);
  return parked_.size();
}

uint64_t CorpusStore::LastAppliedSeq() const {
  std::shared_lock lock(mu_);
  return last_seq_;
}

std::vector<SyncReport> CorpusStore::SyncLog() const {
  std::shared_lock lock(mu_);
  return sync_log_;
}

CandidateIndex CorpusStore::Index() const {
  std::shared_lock lock(mu_);
  CandidateIndex out;
  for (const Document& d : docs_) {
    auto& lists = out[d.id];
    lists.reserve(d.tokens.size());
    for (const Token& t : d.tokens) lists.push_back(t.link.candidates);
  }
  return out;
}

CandidateIndex CorpusStore::ReindexFull() const {
  std::shared_lock lock(mu_);
  CandidateIndex out;
  for (const Document& d : docs_) {
    auto& lists = out[d.id];
    lists.reserve(d.tokens.size());
    for (const Token& t : d.tokens) {
      lists.push_back(t.is_word ? lexicon_.LookupWordformIds(t.surface) : std::vector<EntryId>{});
    }
  }
  return out;
}

std::string CorpusStore::SerializeIndex(const CandidateIndex& index) {
  std::string out;
  for (const auto& [doc, lists] : index) {
    for (size_t i = 0; i < lists.size(); ++i) {
      out += doc;
      out += '\t';
      out += std::to_string(i);
      out += '\t';
      out += Join(lists[i], ",");
      out += '\n';
    }
  }
  return out;
}

std::vector<std::string> CorpusStore::DanglingLinks() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, refs] : chosen_index_) {
    if (lexicon_.Contains(id)) continue;
    for (TokenRef ref : refs) {
      out.push_back(docs_[ref.doc].id + ":" + std::to_string(ref.token) + ":" + id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

FrequencyTable CorpusStore::CorpusFrequency(const CorpusLayer& layer) const {
  std::shared_lock lock(mu_);
  FrequencyTable table;
  for (const Document& d : docs_) {
    if (!layer.Selects(d.metadata)) continue;
    for (const Token& t : d.tokens) {
      const TokenLink& link = t.link;
      if (!link.chosen || LevelValue(link.level) < kFirstCountedLevel) continue;
      if (link.mwu == MwuRole::kContinuation) continue;
      ++table.syntactic_words[*link.chosen];
    }
  }
  for (const auto& [sw, n] : table.syntactic_words) {
    try {
      auto [lemma, superlemma] = lexicon_.Ancestry(sw);
      table.lemmata[lemma] += n;
      table.superlemmata[superlemma] += n;
    } catch (const Error&) {
      // dangling; reported by DanglingLinks
    }
  }
  return table;
}

void CorpusStore::Save(const std::string& path) const {
  std::shared_lock lock(mu_);
  ordered_json j;
  j["format"] = "latinlex-corpus";
  j["version"] = 1;
  j["last_event_seq"] = last_seq_;
  j["next_document"] = next_doc_;
  ordered_json docs = ordered_json::array();
  for (const auto& [id, index] : doc_ids_) {
    const Document& d = docs_[index];
    ordered_json jd;
    jd["id"] = d.id;
    jd["title"] = d.title;
    jd["source"] = SourceFormatName(d.source);
    jd["metadata"] = MetadataJson(d.metadata);
    jd["text"] = d.text;
    ordered_json tokens = ordered_json::array();
    for (const Token& t : d.tokens) {
      // [begin, end, is_word, level, chosen, candidates, editor, timestamp, mwu]
      const TokenLink& l = t.link;
      tokens.push_back(ordered_json::array(
          {t.begin, t.end, t.is_word, LevelValue(l.level),
           l.chosen ? ordered_json(*l.chosen) : ordered_json(nullptr), l.candidates, l.editor,
           l.timestamp ? ordered_json(FormatTimestamp(*l.timestamp)) : ordered_json(nullptr),
           static_cast<int>(l.mwu)}));
    }
    jd["tokens"] = std::move(tokens);
    docs.push_back(std::move(jd));
  }
  j["documents"] = std::move(docs);
  WriteFile(path, j.dump() + "\n");
}

std::unique_ptr<CorpusStore> CorpusStore::Load(const std::string& path, const Lexicon& lexicon,
                                               Clock clock) {
  ordered_json j;
  try {
    j = ordered_json::parse(ReadFile(path));
  } catch (const ordered_json::parse_error& e) {
    throw Error(ErrorCode::kParse, e.what(), path);
  }
  auto store = std::make_unique<CorpusStore>(lexicon, std::move(clock));
  try {
    if (j.value("format", "") != "latinlex-corpus") {
      throw Error(ErrorCode::kParse, "not a corpus snapshot", path);
    }
    store->next_doc_ = j.at("next_document").get<uint64_t>();
    for (const auto& jd : j.at("documents")) {
      Document d;
      d.id = jd.at("id").get<std::string>();
      d.title = jd.at("title").get<std::string>();
      d.source = ParseSourceFormat(jd.at("source").get<std::string>());
      d.metadata = MetadataFromJson(jd.at("metadata"));
      d.text = jd.at("text").get<std::string>();
      for (const auto& jt : jd.at("tokens")) {
        Token t;
        t.begin = jt.at(0).get<size_t>();
        t.end = jt.at(1).get<size_t>();
        if (t.begin > t.end || t.end > d.text.size()) {
          throw Error(ErrorCode::kParse, "token offsets out of range in " + d.id, path);
        }
        t.surface = d.text.substr(t.begin, t.end - t.begin);
        t.is_word = jt.at(2).get<bool>();
        int level = jt.at(3).get<int>();
        if (level < 0 || level > 8) throw Error(ErrorCode::kParse, "bad level in " + d.id, path);
        t.link.level = static_cast<AnnotationLevel>(level);
        if (!jt.at(4).is_null()) t.link.chosen = jt.at(4).get<std::string>();
        t.link.editor = jt.at(6).get<std::string>();
        if (!jt.at(7).is_null()) t.link.timestamp = ParseTimestamp(jt.at(7).get<std::string>());
        int mwu = jt.at(8).get<int>();
        if (mwu < 0 || mwu > 2) throw Error(ErrorCode::kParse, "bad mwu role in " + d.id, path);
        t.link.mwu = static_cast<MwuRole>(mwu);
        d.tokens.push_back(std::move(t));
      }
      std::string id = d.id;
      if (store->doc_ids_.count(id)) {
        throw Error(ErrorCode::kParse, "duplicate document " + id, path);
      }
      store->docs_.push_back(std::move(d));
      store->doc_ids_[id] = static_cast<uint32_t>(store->docs_.size() - 1);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what(), path);
  }
  // The lexicon may have moved on since the snapshot; recompute candidates
  // rather than trusting the stored ones.
  std::unique_lock lock(store->mu_);
  for (Document& d : store->docs_) {
    for (Token& t : d.tokens) {
      if (t.is_word) t.link.candidates = lexicon.LookupWordformIds(t.surface);
    }
  }
  for (uint32_t i = 0; i < store->docs_.size(); ++i) store->IndexDocument(i);
  store->last_seq_ = lexicon.LastEventSeq();
  return store;
}

}  // namespace latinlex
