#ifndef LATINLEX_LEXICON_H_
#define LATINLEX_LEXICON_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "latinlex/features.h"
#include "latinlex/text.h"

namespace latinlex {

// Opaque, never-reused identifiers. The leading letter encodes the level
// (S superlemma, L lemma, W syntactic word); the rest is a decimal counter.
using EntryId = std::string;

enum class EntryKind { kSuperlemma, kLemma, kSyntacticWord };

// Throws Error(kValidation) for strings that are not entry ids.
EntryKind KindOf(std::string_view id);

// Numeric ordering of ids of the same kind ("W9" < "W10").
struct IdLess {
  bool operator()(std::string_view a, std::string_view b) const;
  using is_transparent = void;
};

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Clock = std::function<Timestamp()>;

Timestamp SystemNow();
// ISO-8601 UTC with millisecond precision, e.g. 2019-05-01T12:00:00.000Z.
std::string FormatTimestamp(Timestamp t);
Timestamp ParseTimestamp(std::string_view text);

enum class AuditAction { kCreate, kUpdate, kMerge, kDelete, kDoubleCheck };
std::string_view AuditActionName(AuditAction action);
AuditAction ParseAuditAction(std::string_view name);

struct AuditRecord {
  uint64_t seq = 0;
  std::string author;
  Timestamp timestamp{};
  AuditAction action = AuditAction::kCreate;
  std::string target;  // entry id, or a description for bulk operations
  std::string detail;

  bool operator==(const AuditRecord&) const = default;
};

struct Superlemma {
  EntryId id;
  std::string form;  // normalized citation form
  PosTag pos = PosTag::kXY;
  AuditRecord audit;  // most recent record touching this entry
};

struct Lemma {
  EntryId id;
  EntryId superlemma_id;
  std::string form;  // spelling variant, kept as entered
  bool double_checked = false;
  AuditRecord audit;
};

struct SyntacticWord {
  EntryId id;
  EntryId lemma_id;
  std::string wordform;
  FeatureVector features;
  uint64_t corpus_frequency = 0;
  AuditRecord audit;
};

struct MultiWordUnit {
  EntryId superlemma_id;
  EntryId syntactic_word_id;
  std::vector<std::string> component_forms;  // order is significant
};

// One lookup result with its full hierarchy.
struct Candidate {
  SyntacticWord word;
  Lemma lemma;
  Superlemma superlemma;
};

enum class LexiconEventKind { kCreate, kMerge, kDelete, kRelabel };
std::string_view LexiconEventKindName(LexiconEventKind kind);

// Emitted after every mutation that can change token candidates or links.
// Carries everything a consumer needs even though the lexicon has already
// moved on (e.g. the wordforms of deleted entries).
struct LexiconEvent {
  uint64_t seq = 0;
  LexiconEventKind kind = LexiconEventKind::kCreate;
  std::vector<std::string> affected_wordforms;  // normalized, sorted, unique
  std::map<EntryId, EntryId, IdLess> remap;     // merge: removed id -> surviving id
  std::vector<EntryId> removed;                 // ids that no longer resolve
  std::vector<EntryId> relabeled;
};

struct MergeReport {
  EntryId survivor_id;
  EntryId absorbed_id;
  size_t moved = 0;          // syntactic words re-parented
  size_t deduplicated = 0;   // syntactic words folded into an existing one
  std::map<EntryId, EntryId, IdLess> remap;
  uint64_t event_seq = 0;
};

struct DeleteReport {
  std::vector<EntryId> removed;
  size_t superlemmata = 0;
  size_t lemmata = 0;
  size_t syntactic_words = 0;
  uint64_t event_seq = 0;

  size_t total() const { return superlemmata + lemmata + syntactic_words; }
};

struct NewForm {
  std::string wordform;
  FeatureVector features;
  uint64_t frequency = 0;
};

struct AddFormsResult {
  std::vector<SyntacticWord> words;  // one per input form, new or pre-existing
  size_t created = 0;
};

struct IntegrityViolation {
  EntryId id;
  std::string problem;
};

// Raw entry data used by importers, which supply their own ids.
struct EntryRecord {
  std::optional<Superlemma> superlemma;
  std::optional<Lemma> lemma;
  std::optional<SyntacticWord> word;
};

// The four-level lexicon (wordform / syntactic word / lemma / superlemma).
//
// Single writer, many readers: mutations are serialized, readers take a
// shared lock and always see a complete hierarchy. Every successful mutating
// call appends exactly one audit record; failed calls leave no trace.
// Listeners receive LexiconEvents in mutation order, after the state change
// is visible to readers.
class Lexicon {
 public:
  using Listener = std::function<void(const LexiconEvent&)>;

  explicit Lexicon(Normalizer normalizer = Normalizer(), Clock clock = SystemNow);
  Lexicon(const Lexicon&) = delete;
  Lexicon& operator=(const Lexicon&) = delete;

  const Normalizer& normalizer() const { return normalizer_; }
  std::string Normalize(std::string_view raw) const { return normalizer_.Normalize(raw); }

  // -- mutations --------------------------------------------------------

  Superlemma CreateSuperlemma(std::string_view form, PosTag pos, std::string_view author);
  Lemma CreateLemma(const EntryId& superlemma_id, std::string_view form,
                    std::string_view author);
  // Adds syntactic words under a lemma, skipping (wordform, features) pairs
  // the lemma already has. One audit record for the whole batch.
  AddFormsResult AddSyntacticWords(const EntryId& lemma_id, const std::vector<NewForm>& forms,
                                   std::string_view author);
  MergeReport MergeLemmata(const EntryId& survivor_id, const EntryId& absorbed_id,
                           std::string_view author);
  DeleteReport DeleteEntry(const EntryId& id, bool cascade, std::string_view author);
  Lemma MarkDoubleChecked(const EntryId& lemma_id, std::string_view author);
  // Changes the citation form (superlemma, lemma) or the wordform
  // (syntactic word) while keeping the id.
  void Relabel(const EntryId& id, std::string_view new_form, std::string_view author);
  // Overwrites corpus frequencies; ids missing from the map are reset to 0.
  void SetCorpusFrequencies(const std::map<EntryId, uint64_t, IdLess>& counts,
                            std::string_view author);
  MultiWordUnit CreateMultiWordUnit(const EntryId& superlemma_id,
                                    const std::vector<std::string>& components,
                                    std::string_view author);

  // Bulk insert of externally identified entries (import). Each record is
  // validated independently; failures are returned per record index and do
  // not stop the batch. Appends one audit record per call.
  std::vector<std::pair<size_t, std::string>> InsertRecords(
      const std::vector<EntryRecord>& records, std::string_view author, std::string_view source);

  // -- queries ----------------------------------------------------------

  // All syntactic words whose normalized wordform equals Normalize(form),
  // ordered by superlemma form, then feature order, then ids. Unknown or
  // empty forms yield an empty list.
  std::vector<Candidate> LookupWordform(std::string_view form) const;
  std::vector<EntryId> LookupWordformIds(std::string_view form) const;

  std::optional<Superlemma> FindSuperlemma(const EntryId& id) const;
  std::optional<Lemma> FindLemma(const EntryId& id) const;
  std::optional<SyntacticWord> FindSyntacticWord(const EntryId& id) const;
  std::optional<Superlemma> FindSuperlemmaByForm(std::string_view form, PosTag pos) const;
  std::vector<Superlemma> FindSuperlemmataByForm(std::string_view form) const;
  std::vector<Lemma> FindLemmataByForm(std::string_view form) const;
  bool Contains(const EntryId& id) const;
  // Resolves any id to its lemma and superlemma ids (a lemma resolves to
  // itself). Throws Error(kNotFound).
  std::pair<EntryId, EntryId> Ancestry(const EntryId& id) const;
  PosTag PosOf(const EntryId& id) const;

  std::vector<Superlemma> Superlemmata() const;
  std::vector<Lemma> LemmataOf(const EntryId& superlemma_id) const;
  std::vector<SyntacticWord> SyntacticWordsOf(const EntryId& lemma_id) const;
  std::vector<Lemma> AllLemmata() const;
  std::vector<SyntacticWord> AllSyntacticWords() const;
  std::vector<MultiWordUnit> MultiWordUnits() const;
  // Consistent snapshot in export order: superlemmata by id, each followed
  // by its lemmata and their syntactic words. Childless superlemmata and
  // lemmata appear as records with the lower levels unset.
  std::vector<EntryRecord> ExportRecords() const;

  size_t SuperlemmaCount() const;
  size_t LemmaCount() const;
  size_t SyntacticWordCount() const;
  size_t DoubleCheckedCount() const;

  std::vector<AuditRecord> AuditLog() const;
  size_t AuditCount() const;
  std::vector<LexiconEvent> Events() const;
  uint64_t LastEventSeq() const;

  // Full scan for dangling references and broken uniqueness constraints.
  std::vector<IntegrityViolation> CheckIntegrity() const;

  // -- events -------------------------------------------------------------

  uint64_t Subscribe(Listener listener);
  void Unsubscribe(uint64_t handle);

  // -- persistence hooks (see lexicon_io.h) --------------------------------

  struct Counters {
    uint64_t next_superlemma = 1;
    uint64_t next_lemma = 1;
    uint64_t next_word = 1;
    uint64_t next_audit = 1;
    uint64_t next_event = 1;
  };
  Counters counters() const;
  // Restores a complete saved state. Only valid on an empty lexicon.
  void Restore(const std::vector<EntryRecord>& records, const std::vector<MultiWordUnit>& mwus,
               const std::vector<AuditRecord>& audit, const Counters& counters);

 private:
  using WordKey = std::pair<std::string, FeatureVector>;

  AuditRecord AppendAudit(std::string_view author, AuditAction action, std::string target,
                          std::string detail = {});
  LexiconEvent& AppendEvent(LexiconEventKind kind, std::set<std::string> wordforms);
  void Publish(std::optional<LexiconEvent> event);

  // Unlocked helpers; callers hold mu_.
  Candidate MakeCandidate(const SyntacticWord& w) const;
  void IndexWord(const SyntacticWord& w);
  void UnindexWord(const SyntacticWord& w);
  void RemoveWord(const EntryId& id);
  bool CandidateLess(const Candidate& a, const Candidate& b) const;
  std::string NormalizeOrEmpty(std::string_view s) const;
  EntryId NextId(char prefix, uint64_t* counter);
  static void BumpCounter(const EntryId& id, uint64_t* counter);

  Normalizer normalizer_;
  Clock clock_;

  mutable std::shared_mutex mu_;
  std::mutex writer_mu_;

  std::map<EntryId, Superlemma, IdLess> superlemmata_;
  std::map<EntryId, Lemma, IdLess> lemmata_;
  std::map<EntryId, SyntacticWord, IdLess> words_;
  std::map<EntryId, std::set<EntryId, IdLess>, IdLess> lemmas_of_;
  std::map<EntryId, std::set<EntryId, IdLess>, IdLess> words_of_;
  std::map<EntryId, std::map<WordKey, EntryId>, IdLess> word_keys_;
  std::map<std::pair<std::string, PosTag>, EntryId> superlemma_keys_;
  std::unordered_map<std::string, std::set<EntryId, IdLess>> wordform_index_;
  std::vector<MultiWordUnit> mwus_;
  std::vector<AuditRecord> audit_;
  std::vector<LexiconEvent> events_;
  Counters counters_;

  std::mutex listeners_mu_;
  std::map<uint64_t, Listener> listeners_;
  uint64_t next_listener_ = 1;
};

}  // namespace latinlex

#endif  // LATINLEX_LEXICON_H_
