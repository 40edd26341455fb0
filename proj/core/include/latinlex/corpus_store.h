#ifndef LATINLEX_CORPUS_STORE_H_
#define LATINLEX_CORPUS_STORE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "latinlex/lexicon.h"
#include "latinlex/tokenizer.h"

namespace latinlex {

enum class SourceFormat { kPlain, kTei };
std::string_view SourceFormatName(SourceFormat format);
SourceFormat ParseSourceFormat(std::string_view name);

struct DocumentMetadata {
  std::string genre;
  std::string author;
  std::optional<int> date_from;
  std::optional<int> date_to;

  // Sidecar JSON: {"genre": ..., "author": ..., "date_from": ..., "date_to": ...}
  static DocumentMetadata FromJson(std::string_view json);
  std::string ToJson() const;
  bool operator==(const DocumentMetadata&) const = default;
};

// Lemmatization state of a token, ordered from "no lexicon entry" to
// "double-checked". Levels 6 to 8 are set only by editors.
enum class AnnotationLevel : uint8_t {
  kUnknown = 0,        // no candidate in the lexicon (shown in blue)
  kSuspect = 1,        // OCR error or abbreviation suspected
  kUndecided = 2,      // ambiguous, nothing chosen
  kAutoLow = 3,        // ambiguous, chosen automatically with low confidence
  kAutoHigh = 4,       // ambiguous, chosen automatically with high confidence
  kUnambiguous = 5,    // all candidates belong to one lemma
  kConfirmed = 6,      // editor confirmed the automatic choice
  kCorrected = 7,      // editor chose another or a new entry
  kDoubleChecked = 8,  // second editor pass
};
inline constexpr int kFirstHumanLevel = 6;
inline constexpr int kFirstCountedLevel = 3;  // levels at which a choice counts as used
std::string_view AnnotationLevelName(AnnotationLevel level);
inline int LevelValue(AnnotationLevel level) { return static_cast<int>(level); }

// Position of a token inside a linked multi-word unit.
enum class MwuRole : uint8_t { kNone, kHead, kContinuation };

struct TokenLink {
  std::vector<EntryId> candidates;  // syntactic word ids, lookup order
  std::optional<EntryId> chosen;
  AnnotationLevel level = AnnotationLevel::kUnknown;
  std::string editor;
  std::optional<Timestamp> timestamp;
  MwuRole mwu = MwuRole::kNone;

  bool operator==(const TokenLink&) const = default;
};

struct Token {
  std::string surface;
  size_t begin = 0;
  size_t end = 0;
  bool is_word = false;
  TokenLink link;

  bool operator==(const Token&) const = default;
};

struct Document {
  std::string id;
  std::string title;
  SourceFormat source = SourceFormat::kPlain;
  DocumentMetadata metadata;
  std::string text;  // the tokenized text (TEI: extracted body text)
  std::vector<Token> tokens;
};

struct DocumentSummary {
  std::string id;
  std::string title;
  DocumentMetadata metadata;
  size_t tokens = 0;
  size_t word_tokens = 0;
};

// Selects documents: "reference" (or "all"), "genre:<g>" or a bare genre
// name, "author:<a>".
struct CorpusLayer {
  enum class Kind { kAll, kGenre, kAuthor };
  std::string id;
  Kind kind = Kind::kAll;
  std::string value;

  static CorpusLayer Parse(std::string_view id);
  bool Selects(const DocumentMetadata& metadata) const;
};

enum class LinkAction { kConfirm, kCorrect, kCreate, kDoubleCheck };
std::string_view LinkActionName(LinkAction action);
LinkAction ParseLinkAction(std::string_view name);

struct SyncReport {
  uint64_t event_seq = 0;
  LexiconEventKind kind = LexiconEventKind::kCreate;
  std::map<std::string, size_t, IdLess> touched_per_document;
  size_t touched = 0;               // distinct tokens changed
  size_t candidates_rewritten = 0;  // tokens whose candidate list changed
  size_t links_remapped = 0;        // chosen id replaced by a merge survivor
  size_t links_downgraded = 0;      // chosen id deleted; level set to 2
};

// Candidate lists of every token, per document in id order.
using CandidateIndex = std::map<std::string, std::vector<std::vector<EntryId>>, IdLess>;

struct FrequencyTable {
  std::map<EntryId, uint64_t, IdLess> syntactic_words;
  std::map<EntryId, uint64_t, IdLess> lemmata;
  std::map<EntryId, uint64_t, IdLess> superlemmata;
};

// A proposed automatic link update for one token.
struct AutoLink {
  size_t token = 0;
  std::optional<EntryId> chosen;
  AnnotationLevel level = AnnotationLevel::kUnknown;
  MwuRole mwu = MwuRole::kNone;
};

// Documents, tokens and their links to the lexicon. Candidate lists are
// kept in sync with lexicon events incrementally: only tokens whose
// normalized surface appears in an event, or whose chosen id the event
// remaps or removes, are revisited. ReindexFull is the oracle the
// incremental path must agree with.
//
// Events are applied one at a time under an exclusive lock, so readers see
// each document either before or after an event.
class CorpusStore {
 public:
  explicit CorpusStore(const Lexicon& lexicon, Clock clock = SystemNow);
  ~CorpusStore();
  CorpusStore(const CorpusStore&) = delete;
  CorpusStore& operator=(const CorpusStore&) = delete;

  // Subscribes to the lexicon's events. Events already emitted are treated
  // as applied.
  void Attach();
  void Detach();

  // Plain text must be valid UTF-8; TEI must be well-formed XML (Error(kParse)
  // with a line:column location otherwise). Thread-safe; tokenization runs
  // outside the store lock.
  Document Ingest(std::string_view bytes, SourceFormat format, const DocumentMetadata& metadata,
                  std::string_view title = {});

  std::optional<Document> FindDocument(std::string_view id) const;
  Document GetDocument(std::string_view id) const;  // Error(kNotFound)
  std::vector<DocumentSummary> ListDocuments() const;
  std::vector<std::string> DocumentIds(const CorpusLayer& layer) const;
  std::vector<std::string> Genres() const;
  std::vector<std::string> Authors() const;
  size_t DocumentCount() const;
  size_t TokenCount() const;
  // Calls fn for every selected document, in id order, under the shared
  // lock. fn must not call back into the store.
  void ForEachDocument(const CorpusLayer& layer,
                       const std::function<void(const Document&)>& fn) const;

  // Editor action on one token. confirm sets level 6, correct and create 7,
  // double_check 8 (only on tokens already at 6 or 7). The chosen syntactic
  // word must exist.
  TokenLink LinkToken(std::string_view doc_id, size_t token_index, const EntryId& chosen,
                      std::string_view editor, LinkAction action);

  // Applies machine-made link updates to one document. Tokens at a human
  // level (6 and above) are never changed. Returns the number of tokens
  // updated.
  size_t ApplyAutoLinks(std::string_view doc_id, const std::vector<AutoLink>& links);

  // Applies one lexicon event. Events must arrive in sequence; an event
  // that skips ahead is parked and Error(kSync) is thrown. Parked events are
  // applied as soon as the gap is filled (by a later call or CatchUp).
  // Already applied events are ignored.
  SyncReport ApplyLexiconUpdate(const LexiconEvent& event);
  // Pulls every event after LastAppliedSeq from the lexicon's log.
  std::vector<SyncReport> CatchUp();
  size_t ParkedCount() const;
  uint64_t LastAppliedSeq() const;
  std::vector<SyncReport> SyncLog() const;

  CandidateIndex Index() const;
  // Fresh lookup for every token; does not modify the store.
  CandidateIndex ReindexFull() const;
  static std::string SerializeIndex(const CandidateIndex& index);

  // Chosen ids that no longer resolve in the lexicon ("doc:token:id").
  std::vector<std::string> DanglingLinks() const;

  // Counts of chosen links at level 3 or above; a multi-word unit counts
  // once. Lemma and superlemma counts are sums over their syntactic words.
  FrequencyTable CorpusFrequency(const CorpusLayer& layer) const;

  void Save(const std::string& path) const;
  static std::unique_ptr<CorpusStore> Load(const std::string& path, const Lexicon& lexicon,
                                           Clock clock = SystemNow);

 private:
  struct TokenRef {
    uint32_t doc;
    uint32_t token;
    auto operator<=>(const TokenRef&) const = default;
  };

  void IndexDocument(uint32_t doc_index);  // callers hold mu_
  void SetChosen(TokenRef ref, std::optional<EntryId> chosen);
  SyncReport ApplyLocked(const LexiconEvent& event);
  std::vector<SyncReport> DrainParkedLocked();
  uint32_t DocIndex(std::string_view id) const;

  const Lexicon& lexicon_;
  Clock clock_;
  std::optional<uint64_t> subscription_;

  mutable std::shared_mutex mu_;
  std::vector<Document> docs_;
  std::map<std::string, uint32_t, IdLess> doc_ids_;
  std::unordered_map<std::string, std::vector<TokenRef>> surface_index_;  // normalized surface
  std::unordered_map<EntryId, std::set<TokenRef>> chosen_index_;
  std::map<uint64_t, LexiconEvent> parked_;
  std::vector<SyncReport> sync_log_;
  uint64_t last_seq_ = 0;
  uint64_t next_doc_ = 1;
};

}  // namespace latinlex

#endif  // LATINLEX_CORPUS_STORE_H_
