#include "latinlex/lexicon.h"

#include <algorithm>
#include <cstdio>
#include <iostream>

#include "latinlex/error.h"

namespace latinlex {
namespace {

// Civil date conversions (proleptic Gregorian), after H. Hinnant.
int64_t DaysFromCivil(int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void CivilFromDays(int64_t z, int64_t* y, unsigned* m, unsigned* d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  *d = doy - (153 * mp + 2) / 5 + 1;
  *m = mp < 10 ? mp + 3 : mp - 9;
  *y = static_cast<int64_t>(yoe) + era * 400 + (*m <= 2);
}

void RequireAuthor(std::string_view author) {
  if (Trim(author).empty()) {
    throw Error(ErrorCode::kValidation, "mutations require an author identity");
  }
}

std::string RequireForm(std::string_view form, std::string_view what) {
  std::string_view trimmed = Trim(form);
  if (trimmed.empty()) {
    throw Error(ErrorCode::kValidation, std::string(what) + " must not be empty");
  }
  if (!IsValidUtf8(trimmed)) {
    throw Error(ErrorCode::kValidation, std::string(what) + " is not valid UTF-8");
  }
  if (trimmed.find_first_of("\t\n\r") != std::string_view::npos) {
    throw Error(ErrorCode::kValidation, std::string(what) + " contains control whitespace");
  }
  return std::string(trimmed);
}

}  // namespace

EntryKind KindOf(std::string_view id) {
  if (id.size() >= 2 &&
      std::all_of(id.begin() + 1, id.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    switch (id[0]) {
      case 'S': return EntryKind::kSuperlemma;
      case 'L': return EntryKind::kLemma;
      case 'W': return EntryKind::kSyntacticWord;
    }
  }
  throw Error(ErrorCode::kValidation, "malformed entry id '" + std::string(id) + "'");
}

bool IdLess::operator()(std::string_view a, std::string_view b) const {
  if (a.empty() || b.empty() || a[0] != b[0]) return a < b;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

Timestamp SystemNow() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(
      std::chrono::system_clock::now());
}

std::string FormatTimestamp(Timestamp t) {
  int64_t ms = t.time_since_epoch().count();
  int64_t days = ms >= 0 ? ms / 86400000 : -((-ms + 86399999) / 86400000);
  int64_t rem = ms - days * 86400000;
  int64_t y;
  unsigned mo, d;
  CivilFromDays(days, &y, &mo, &d);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                static_cast<long long>(y), mo, d, static_cast<long long>(rem / 3600000),
                static_cast<long long>(rem / 60000 % 60), static_cast<long long>(rem / 1000 % 60),
                static_cast<long long>(rem % 1000));
  return buf;
}

Timestamp ParseTimestamp(std::string_view text) {
  long long y;
  unsigned mo, d, h, mi, s, ms = 0;
  std::string buf(text);
  int n = std::sscanf(buf.c_str(), "%lld-%u-%uT%u:%u:%u.%uZ", &y, &mo, &d, &h, &mi, &s, &ms);
  if (n < 6 || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60 ||
      ms > 999) {
    throw Error(ErrorCode::kParse, "malformed timestamp '" + buf + "'");
  }
  int64_t days = DaysFromCivil(y, mo, d);
  int64_t total = ((days * 24 + h) * 60 + mi) * 60 + s;
  return Timestamp(std::chrono::milliseconds(total * 1000 + ms));
}

std::string_view AuditActionName(AuditAction action) {
  switch (action) {
    case AuditAction::kCreate: return "create";
    case AuditAction::kUpdate: return "update";
    case AuditAction::kMerge: return "merge";
    case AuditAction::kDelete: return "delete";
    case AuditAction::kDoubleCheck: return "double_check";
  }
  return "update";
}

AuditAction ParseAuditAction(std::string_view name) {
  for (auto a : {AuditAction::kCreate, AuditAction::kUpdate, AuditAction::kMerge,
                 AuditAction::kDelete, AuditAction::kDoubleCheck}) {
    if (AuditActionName(a) == name) return a;
  }
  throw Error(ErrorCode::kParse, "unknown audit action '" + std::string(name) + "'");
}

std::string_view LexiconEventKindName(LexiconEventKind kind) {
  switch (kind) {
    case LexiconEventKind::kCreate: return "create";
    case LexiconEventKind::kMerge: return "merge";
    case LexiconEventKind::kDelete: return "delete";
    case LexiconEventKind::kRelabel: return "relabel";
  }
  return "create";
}

Lexicon::Lexicon(Normalizer normalizer, Clock clock)
    : normalizer_(std::move(normalizer)), clock_(std::move(clock)) {}

// ---------------------------------------------------------------------------
// Internal helpers

EntryId Lexicon::NextId(char prefix, uint64_t* counter) {
  return std::string(1, prefix) + std::to_string((*counter)++);
}

void Lexicon::BumpCounter(const EntryId& id, uint64_t* counter) {
  uint64_t n = std::stoull(id.substr(1));
  if (n >= *counter) *counter = n + 1;
}

AuditRecord Lexicon::AppendAudit(std::string_view author, AuditAction action, std::string target,
                                 std::string detail) {
  AuditRecord record;
  record.seq = counters_.next_audit++;
  record.author = std::string(Trim(author));
  record.timestamp = clock_();
  record.action = action;
  record.target = std::move(target);
  record.detail = std::move(detail);
  audit_.push_back(record);
  return record;
}

LexiconEvent& Lexicon::AppendEvent(LexiconEventKind kind, std::set<std::string> wordforms) {
  LexiconEvent event;
  event.seq = counters_.next_event++;
  event.kind = kind;
  event.affected_wordforms.assign(wordforms.begin(), wordforms.end());
  events_.push_back(std::move(event));
  return events_.back();
}

void Lexicon::Publish(std::optional<LexiconEvent> event) {
  if (!event) return;
  std::vector<Listener> listeners;
  {
    std::lock_guard lock(listeners_mu_);
    for (auto& [handle, l] : listeners_) listeners.push_back(l);
  }
  for (auto& l : listeners) {
    try {
      l(*event);
    } catch (const std::exception& e) {
      std::cerr << "lexicon listener failed on event " << event->seq << ": " << e.what() << "\n";
    }
  }
}

std::string Lexicon::NormalizeOrEmpty(std::string_view s) const {
  try {
    return normalizer_.Normalize(s);
  } catch (const Error&) {
    return {};
  }
}

void Lexicon::IndexWord(const SyntacticWord& w) {
  wordform_index_[normalizer_.Normalize(w.wordform)].insert(w.id);
}

void Lexicon::UnindexWord(const SyntacticWord& w) {
  auto key = normalizer_.Normalize(w.wordform);
  auto it = wordform_index_.find(key);
  if (it == wordform_index_.end()) return;
  it->second.erase(w.id);
  if (it->second.empty()) wordform_index_.erase(it);
}

void Lexicon::RemoveWord(const EntryId& id) {
  auto it = words_.find(id);
  if (it == words_.end()) return;
  const SyntacticWord& w = it->second;
  UnindexWord(w);
  words_of_[w.lemma_id].erase(id);
  word_keys_[w.lemma_id].erase({w.wordform, w.features});
  std::erase_if(mwus_, [&](const MultiWordUnit& m) { return m.syntactic_word_id == id; });
  words_.erase(it);
}

Candidate Lexicon::MakeCandidate(const SyntacticWord& w) const {
  const Lemma& l = lemmata_.at(w.lemma_id);
  return Candidate{w, l, superlemmata_.at(l.superlemma_id)};
}

bool Lexicon::CandidateLess(const Candidate& a, const Candidate& b) const {
  if (a.superlemma.form != b.superlemma.form) return a.superlemma.form < b.superlemma.form;
  if (a.superlemma.pos != b.superlemma.pos) return a.superlemma.pos < b.superlemma.pos;
  if (a.word.features != b.word.features) return a.word.features < b.word.features;
  IdLess less;
  if (a.superlemma.id != b.superlemma.id) return less(a.superlemma.id, b.superlemma.id);
  if (a.lemma.id != b.lemma.id) return less(a.lemma.id, b.lemma.id);
  return less(a.word.id, b.word.id);
}

// ---------------------------------------------------------------------------
// Mutations

Superlemma Lexicon::CreateSuperlemma(std::string_view form, PosTag pos, std::string_view author) {
  std::lock_guard writer(writer_mu_);
  std::unique_lock lock(mu_);
  RequireAuthor(author);
  std::string normalized = normalizer_.Normalize(RequireForm(form, "superlemma form"));
  if (superlemma_keys_.count({normalized, pos})) {
    throw Error(ErrorCode::kConflict, "superlemma '" + normalized + "' (" +
                                          std::string(PosTagName(pos)) + ") already exists");
  }
  Superlemma s;
  s.id = NextId('S', &counters_.next_superlemma);
  s.form = normalized;
  s.pos = pos;
  s.audit = AppendAudit(author, AuditAction::kCreate, s.id);
  superlemma_keys_[{s.form, pos}] = s.id;
  lemmas_of_[s.id];
  superlemmata_[s.id] = s;
  return s;
}

Lemma Lexicon::CreateLemma(const EntryId& superlemma_id, std::string_view form,
                           std::string_view author) {
  std::lock_guard writer(writer_mu_);
  std::unique_lock lock(mu_);
  RequireAuthor(author);
  std::string f = RequireForm(form, "lemma form");
  if (!superlemmata_.count(superlemma_id)) {
    throw Error(ErrorCode::kNotFound, "superlemma " + superlemma_id + " does not exist");
  }
  for (const EntryId& lid : lemmas_of_[superlemma_id]) {
    if (lemmata_.at(lid).form == f) {
      throw Error(ErrorCode::kConflict,
                  "lemma '" + f + "' already exists under " + superlemma_id);
    }
  }
  Lemma l;
  l.id = NextId('L', &counters_.next_lemma);
  l.superlemma_id = superlemma_id;
  l.form = f;
  l.audit = AppendAudit(author, AuditAction::kCreate, l.id);
  lemmas_of_[superlemma_id].insert(l.id);
  words_of_[l.id];
  word_keys_[l.id];
  lemmata_[l.id] = l;
  return l;
}

AddFormsResult Lexicon::AddSyntacticWords(const EntryId& lemma_id, const std::vector<NewForm>& forms,
                                          std::string_view author) {
  std::lock_guard writer(writer_mu_);
  std::optional<LexiconEvent> event;
  AddFormsResult result;
  {
    std::unique_lock lock(mu_);
    RequireAuthor(author);
    auto lit = lemmata_.find(lemma_id);
    if (lit == lemmata_.end()) {
      throw Error(ErrorCode::kNotFound, "lemma " + lemma_id + " does not exist");
    }
    PosTag pos = superlemmata_.at(lit->second.superlemma_id).pos;
    std::vector<std::string> wordforms;
    wordforms.reserve(forms.size());
    for (const NewForm& nf : forms) {
      wordforms.push_back(RequireForm(nf.wordform, "wordform"));
      ValidateFeatures(pos, nf.features);
    }
    AuditRecord record = AppendAudit(author, AuditAction::kCreate, lemma_id,
                                     "forms=" + std::to_string(forms.size()));
    auto& keys = word_keys_[lemma_id];
    std::set<std::string> affected;
    for (size_t i = 0; i < forms.size(); ++i) {
      WordKey key{wordforms[i], forms[i].features};
      auto kit = keys.find(key);
      if (kit != keys.end()) {
        result.words.push_back(words_.at(kit->second));
        continue;
      }
      SyntacticWord w;
      w.id = NextId('W', &counters_.next_word);
      w.lemma_id = lemma_id;
      w.wordform = wordforms[i];
      w.features = forms[i].features;
      w.corpus_frequency = forms[i].frequency;
      w.audit = record;
      keys[key] = w.id;
      words_of_[lemma_id].insert(w.id);
      IndexWord(w);
      affected.insert(normalizer_.Normalize(w.wordform));
      words_[w.id] = w;
      result.words.push_back(w);
      ++result.created;
    }
    if (result.created > 0) {
      lit->second.audit = record;
      event = AppendEvent(LexiconEventKind::kCreate, std::move(affected));
    }
  }
  Publish(std::move(event));
  return result;
}

MergeReport Lexicon::MergeLemmata(const EntryId& survivor_id, const EntryId& absorbed_id,
                                  std::string_view author) {
  std::lock_guard writer(writer_mu_);
  std::optional<LexiconEvent> event;
  MergeReport report;
  {
    std::unique_lock lock(mu_);
    RequireAuthor(author);
    if (survivor_id == absorbed_id) {
      throw Error(ErrorCode::kValidation, "cannot merge lemma " + survivor_id + " into itself");
    }
    auto sit = lemmata_.find(survivor_id);
    auto ait = lemmata_.find(absorbed_id);
    if (sit == lemmata_.end()) throw Error(ErrorCode::kNotFound, "lemma " + survivor_id + " does not exist");
    if (ait == lemmata_.end()) throw Error(ErrorCode::kNotFound, "lemma " + absorbed_id + " does not exist");
    PosTag spos = superlemmata_.at(sit->second.superlemma_id).pos;
    PosTag apos = superlemmata_.at(ait->second.superlemma_id).pos;
    if (spos != apos) {
      throw Error(ErrorCode::kValidation, "cannot merge lemmata of different parts of speech (" +
                                              std::string(PosTagName(spos)) + " vs " +
                                              std::string(PosTagName(apos)) + ")");
    }
    AuditRecord record = AppendAudit(author, AuditAction::kMerge, survivor_id,
                                     "absorbed=" + absorbed_id);
    report.survivor_id = survivor_id;
    report.absorbed_id = absorbed_id;

    std::set<std::string> affected;
    auto& survivor_keys = word_keys_[survivor_id];
    std::vector<EntryId> absorbed_words(words_of_[absorbed_id].begin(),
                                        words_of_[absorbed_id].end());
    for (const EntryId& wid : absorbed_words) {
      SyntacticWord& w = words_.at(wid);
      affected.insert(normalizer_.Normalize(w.wordform));
      WordKey key{w.wordform, w.features};
      auto existing = survivor_keys.find(key);
      if (existing != survivor_keys.end()) {
        SyntacticWord& keep = words_.at(existing->second);
        keep.corpus_frequency += w.corpus_frequency;
        keep.audit = record;
        for (auto& m : mwus_) {
          if (m.syntactic_word_id == wid) m.syntactic_word_id = keep.id;
        }
        report.remap[wid] = keep.id;
        RemoveWord(wid);
        ++report.deduplicated;
      } else {
        w.lemma_id = survivor_id;
        w.audit = record;
        survivor_keys[key] = wid;
        words_of_[survivor_id].insert(wid);
        ++report.moved;
      }
    }
    const EntryId absorbed_parent = ait->second.superlemma_id;
    lemmas_of_[absorbed_parent].erase(absorbed_id);
    words_of_.erase(absorbed_id);
    word_keys_.erase(absorbed_id);
    lemmata_.erase(ait);
    sit->second.audit = record;
    report.remap[absorbed_id] = survivor_id;

    LexiconEvent& e = AppendEvent(LexiconEventKind::kMerge, std::move(affected));
    e.remap = report.remap;
    for (const auto& [from, to] : report.remap) e.removed.push_back(from);
    report.event_seq = e.seq;
    event = e;
  }
  Publish(std::move(event));
  return report;
}

DeleteReport Lexicon::DeleteEntry(const EntryId& id, bool cascade, std::string_view author) {
  std::lock_guard writer(writer_mu_);
  std::optional<LexiconEvent> event;
  DeleteReport report;
  {
    std::unique_lock lock(mu_);
    RequireAuthor(author);
    EntryKind kind = KindOf(id);
    std::vector<EntryId> superlemmas, lemmas, words;
    switch (kind) {
      case EntryKind::kSuperlemma: {
        if (!superlemmata_.count(id)) throw Error(ErrorCode::kNotFound, "superlemma " + id + " does not exist");
        const auto& children = lemmas_of_[id];
        if (!children.empty() && !cascade) {
          throw Error(ErrorCode::kConstraint, "superlemma " + id + " has " +
                                                  std::to_string(children.size()) +
                                                  " lemmata; use cascade");
        }
        superlemmas.push_back(id);
        for (const EntryId& lid : children) {
          lemmas.push_back(lid);
          for (const EntryId& wid : words_of_[lid]) words.push_back(wid);
        }
        break;
      }
      case EntryKind::kLemma: {
        if (!lemmata_.count(id)) throw Error(ErrorCode::kNotFound, "lemma " + id + " does not exist");
        const auto& children = words_of_[id];
        if (!children.empty() && !cascade) {
          throw Error(ErrorCode::kConstraint, "lemma " + id + " has " +
                                                  std::to_string(children.size()) +
                                                  " syntactic words; use cascade");
        }
        lemmas.push_back(id);
        words.assign(children.begin(), children.end());
        break;
      }
      case EntryKind::kSyntacticWord:
        if (!words_.count(id)) throw Error(ErrorCode::kNotFound, "syntactic word " + id + " does not exist");
        words.push_back(id);
        break;
    }

    AppendAudit(author, AuditAction::kDelete, id, cascade ? "cascade" : std::string());
    std::set<std::string> affected;
    for (const EntryId& wid : words) {
      affected.insert(normalizer_.Normalize(words_.at(wid).wordform));
      RemoveWord(wid);
    }
    for (const EntryId& lid : lemmas) {
      const Lemma& l = lemmata_.at(lid);
      lemmas_of_[l.superlemma_id].erase(lid);
      words_of_.erase(lid);
      word_keys_.erase(lid);
      lemmata_.erase(lid);
    }
    for (const EntryId& sid : superlemmas) {
      const Superlemma& s = superlemmata_.at(sid);
      superlemma_keys_.erase({s.form, s.pos});
      lemmas_of_.erase(sid);
      std::erase_if(mwus_, [&](const MultiWordUnit& m) { return m.superlemma_id == sid; });
      superlemmata_.erase(sid);
    }
    report.superlemmata = superlemmas.size();
    report.lemmata = lemmas.size();
    report.syntactic_words = words.size();
    report.removed = superlemmas;
    report.removed.insert(report.removed.end(), lemmas.begin(), lemmas.end());
    report.removed.insert(report.removed.end(), words.begin(), words.end());
    LexiconEvent& e = AppendEvent(LexiconEventKind::kDelete, std::move(affected));
    e.removed = report.removed;
    report.event_seq = e.seq;
    event = e;
  }
  Publish(std::move(event));
  return report;
}

Lemma Lexicon::MarkDoubleChecked(const EntryId& lemma_id, std::string_view author) {
  std::lock_guard writer(writer_mu_);
  std::unique_lock lock(mu_);
  RequireAuthor(author);
  auto it = lemmata_.find(lemma_id);
  if (it == lemmata_.end()) throw Error(ErrorCode::kNotFound, "lemma " + lemma_id + " does not exist");
  it->second.double_checked = true;
  it->second.audit = AppendAudit(author, AuditAction::kDoubleCheck, lemma_id);
  return it->second;
}

void Lexicon::Relabel(const EntryId& id, std::string_view new_form, std::string_view author) {
  std::lock_guard writer(writer_mu_);
  std::optional<LexiconEvent> event;
  {
    std::unique_lock lock(mu_);
    RequireAuthor(author);
    std::string form = RequireForm(new_form, "form");
    std::set<std::string> affected;
    auto collect_lemma = [&](const EntryId& lid) {
      for (const EntryId& wid : words_of_[lid]) {
        affected.insert(normalizer_.Normalize(words_.at(wid).wordform));
      }
    };
    AuditRecord record;
    switch (KindOf(id)) {
      case EntryKind::kSuperlemma: {
        auto it = superlemmata_.find(id);
        if (it == superlemmata_.end()) throw Error(ErrorCode::kNotFound, "superlemma " + id + " does not exist");
        std::string normalized = normalizer_.Normalize(form);
        auto key = std::make_pair(normalized, it->second.pos);
        auto existing = superlemma_keys_.find(key);
        if (existing != superlemma_keys_.end() && existing->second != id) {
          throw Error(ErrorCode::kConflict, "superlemma '" + normalized + "' already exists");
        }
        record = AppendAudit(author, AuditAction::kUpdate, id, "form=" + normalized);
        superlemma_keys_.erase({it->second.form, it->second.pos});
        superlemma_keys_[key] = id;
        it->second.form = normalized;
        it->second.audit = record;
        for (const EntryId& lid : lemmas_of_[id]) collect_lemma(lid);
        break;
      }
      case EntryKind::kLemma: {
        auto it = lemmata_.find(id);
        if (it == lemmata_.end()) throw Error(ErrorCode::kNotFound, "lemma " + id + " does not exist");
        for (const EntryId& sibling : lemmas_of_[it->second.superlemma_id]) {
          if (sibling != id && lemmata_.at(sibling).form == form) {
            throw Error(ErrorCode::kConflict, "lemma '" + form + "' already exists under " +
                                                  it->second.superlemma_id);
          }
        }
        record = AppendAudit(author, AuditAction::kUpdate, id, "form=" + form);
        it->second.form = form;
        it->second.audit = record;
        collect_lemma(id);
        break;
      }
      case EntryKind::kSyntacticWord: {
        auto it = words_.find(id);
        if (it == words_.end()) throw Error(ErrorCode::kNotFound, "syntactic word " + id + " does not exist");
        SyntacticWord& w = it->second;
        auto& keys = word_keys_[w.lemma_id];
        WordKey new_key{form, w.features};
        auto existing = keys.find(new_key);
        if (existing != keys.end() && existing->second != id) {
          throw Error(ErrorCode::kConflict, "lemma " + w.lemma_id + " already has '" + form +
                                                "' with features " + w.features.ToString());
        }
        std::string new_normalized = normalizer_.Normalize(form);
        record = AppendAudit(author, AuditAction::kUpdate, id, "wordform=" + form);
        affected.insert(normalizer_.Normalize(w.wordform));
        affected.insert(new_normalized);
        UnindexWord(w);
        keys.erase({w.wordform, w.features});
        w.wordform = form;
        w.audit = record;
        keys[new_key] = id;
        IndexWord(w);
        break;
      }
    }
    LexiconEvent& e = AppendEvent(LexiconEventKind::kRelabel, std::move(affected));
    e.relabeled.push_back(id);
    event = e;
  }
  Publish(std::move(event));
}

void Lexicon::SetCorpusFrequencies(const std::map<EntryId, uint64_t, IdLess>& counts,
                                   std::string_view author) {
  std::lock_guard writer(writer_mu_);
  std::unique_lock lock(mu_);
  RequireAuthor(author);
  AppendAudit(author, AuditAction::kUpdate, "corpus_frequency",
              "entries=" + std::to_string(counts.size()));
  for (auto& [id, w] : words_) {
    auto it = counts.find(id);
    w.corpus_frequency = it == counts.end() ? 0 : it->second;
  }
}

MultiWordUnit Lexicon::CreateMultiWordUnit(const EntryId& superlemma_id,
                                           const std::vector<std::string>& components,
                                           std::string_view author) {
  std::lock_guard writer(writer_mu_);
  std::optional<LexiconEvent> event;
  MultiWordUnit unit;
  {
    std::unique_lock lock(mu_);
    RequireAuthor(author);
    if (components.size() < 2) {
      throw Error(ErrorCode::kValidation, "a multi-word unit needs at least two components");
    }
    std::vector<std::string> parts;
    for (const auto& c : components) {
      std::string part = RequireForm(c, "multi-word component");
      if (part.find(' ') != std::string::npos) {
        throw Error(ErrorCode::kValidation, "multi-word components are single tokens");
      }
      parts.push_back(part);
    }
    if (!superlemmata_.count(superlemma_id)) {
      throw Error(ErrorCode::kNotFound, "superlemma " + superlemma_id + " does not exist");
    }
    std::string joined = Join(parts, " ");
    for (const auto& m : mwus_) {
      if (m.superlemma_id == superlemma_id && m.component_forms == parts) {
        throw Error(ErrorCode::kConflict, "multi-word unit '" + joined + "' already exists");
      }
    }
    AuditRecord record = AppendAudit(author, AuditAction::kCreate, superlemma_id, "mwu=" + joined);

    EntryId lemma_id;
    for (const EntryId& lid : lemmas_of_[superlemma_id]) {
      if (lemmata_.at(lid).form == joined) lemma_id = lid;
    }
    if (lemma_id.empty()) {
      Lemma l;
      l.id = NextId('L', &counters_.next_lemma);
      l.superlemma_id = superlemma_id;
      l.form = joined;
      l.audit = record;
      lemmas_of_[superlemma_id].insert(l.id);
      words_of_[l.id];
      word_keys_[l.id];
      lemmata_[l.id] = l;
      lemma_id = l.id;
    }
    WordKey key{joined, FeatureVector()};
    auto& keys = word_keys_[lemma_id];
    EntryId word_id;
    std::set<std::string> affected;
    if (auto kit = keys.find(key); kit != keys.end()) {
      word_id = kit->second;
    } else {
      SyntacticWord w;
      w.id = NextId('W', &counters_.next_word);
      w.lemma_id = lemma_id;
      w.wordform = joined;
      w.audit = record;
      keys[key] = w.id;
      words_of_[lemma_id].insert(w.id);
      IndexWord(w);
      affected.insert(normalizer_.Normalize(joined));
      words_[w.id] = w;
      word_id = w.id;
    }
    unit = MultiWordUnit{superlemma_id, word_id, parts};
    mwus_.push_back(unit);
    if (!affected.empty()) event = AppendEvent(LexiconEventKind::kCreate, std::move(affected));
  }
  Publish(std::move(event));
  return unit;
}

std::vector<std::pair<size_t, std::string>> Lexicon::InsertRecords(
    const std::vector<EntryRecord>& records, std::string_view author, std::string_view source) {
  std::lock_guard writer(writer_mu_);
  std::optional<LexiconEvent> event;
  std::vector<std::pair<size_t, std::string>> failures;
  {
    std::unique_lock lock(mu_);
    RequireAuthor(author);
    std::set<std::string> affected;
    size_t inserted = 0;
    std::vector<size_t> accepted;
    // Validation runs against the state including earlier records of the
    // same batch, so records are applied one at a time.
    AuditRecord record = AppendAudit(author, AuditAction::kCreate, "import", std::string(source));

    for (size_t i = 0; i < records.size(); ++i) {
      const EntryRecord& r = records[i];
      try {
        if (!r.superlemma) throw Error(ErrorCode::kValidation, "row has no superlemma");
        const Superlemma& s = *r.superlemma;
        if (KindOf(s.id) != EntryKind::kSuperlemma) {
          throw Error(ErrorCode::kValidation, "'" + s.id + "' is not a superlemma id");
        }
        std::string sform = normalizer_.Normalize(RequireForm(s.form, "superlemma form"));
        bool new_superlemma = false;
        if (auto it = superlemmata_.find(s.id); it != superlemmata_.end()) {
          if (it->second.form != sform || it->second.pos != s.pos) {
            throw Error(ErrorCode::kConflict, "superlemma " + s.id + " already exists as '" +
                                                  it->second.form + "' (" +
                                                  std::string(PosTagName(it->second.pos)) + ")");
          }
        } else {
          if (superlemma_keys_.count({sform, s.pos})) {
            throw Error(ErrorCode::kConflict, "superlemma '" + sform + "' (" +
                                                  std::string(PosTagName(s.pos)) +
                                                  ") already exists");
          }
          new_superlemma = true;
        }

        bool new_lemma = false;
        std::string lform;
        if (r.lemma) {
          const Lemma& l = *r.lemma;
          if (KindOf(l.id) != EntryKind::kLemma) {
            throw Error(ErrorCode::kValidation, "'" + l.id + "' is not a lemma id");
          }
          lform = RequireForm(l.form, "lemma form");
          if (auto it = lemmata_.find(l.id); it != lemmata_.end()) {
            if (it->second.superlemma_id != s.id || it->second.form != lform) {
              throw Error(ErrorCode::kConflict, "lemma " + l.id + " already exists as '" +
                                                    it->second.form + "' under " +
                                                    it->second.superlemma_id);
            }
          } else {
            if (!new_superlemma) {
              for (const EntryId& sibling : lemmas_of_[s.id]) {
                if (lemmata_.at(sibling).form == lform) {
                  throw Error(ErrorCode::kConflict,
                              "lemma '" + lform + "' already exists under " + s.id);
                }
              }
            }
            new_lemma = true;
          }
        } else if (r.word) {
          throw Error(ErrorCode::kValidation, "syntactic word row without a lemma");
        }

        bool new_word = false;
        std::string wform;
        if (r.word) {
          const SyntacticWord& w = *r.word;
          if (KindOf(w.id) != EntryKind::kSyntacticWord) {
            throw Error(ErrorCode::kValidation, "'" + w.id + "' is not a syntactic word id");
          }
          wform = RequireForm(w.wordform, "wordform");
          ValidateFeatures(s.pos, w.features);
          if (auto it = words_.find(w.id); it != words_.end()) {
            if (it->second.lemma_id != r.lemma->id || it->second.wordform != wform ||
                it->second.features != w.features) {
              throw Error(ErrorCode::kConflict, "syntactic word " + w.id + " already exists");
            }
          } else {
            if (!new_lemma) {
              if (word_keys_[r.lemma->id].count({wform, w.features})) {
                throw Error(ErrorCode::kConflict, "lemma " + r.lemma->id + " already has '" +
                                                      wform + "' " + w.features.ToString());
              }
            }
            new_word = true;
          }
        }

        // Apply.
        if (new_superlemma) {
          Superlemma ns = s;
          ns.form = sform;
          ns.audit = record;
          superlemma_keys_[{sform, s.pos}] = s.id;
          lemmas_of_[s.id];
          superlemmata_[s.id] = ns;
          BumpCounter(s.id, &counters_.next_superlemma);
          ++inserted;
        }
        if (new_lemma) {
          Lemma nl = *r.lemma;
          nl.superlemma_id = s.id;
          nl.form = lform;
          nl.audit = record;
          lemmas_of_[s.id].insert(nl.id);
          words_of_[nl.id];
          word_keys_[nl.id];
          lemmata_[nl.id] = nl;
          BumpCounter(nl.id, &counters_.next_lemma);
          ++inserted;
        }
        if (new_word) {
          SyntacticWord nw = *r.word;
          nw.lemma_id = r.lemma->id;
          nw.wordform = wform;
          nw.audit = record;
          word_keys_[nw.lemma_id][{wform, nw.features}] = nw.id;
          words_of_[nw.lemma_id].insert(nw.id);
          IndexWord(nw);
          affected.insert(normalizer_.Normalize(wform));
          words_[nw.id] = nw;
          BumpCounter(nw.id, &counters_.next_word);
          ++inserted;
        }
      } catch (const Error& e) {
        failures.emplace_back(i, std::string(ErrorCodeName(e.code())) + ": " + e.what());
      }
    }
    (void)inserted;
    if (!affected.empty()) event = AppendEvent(LexiconEventKind::kCreate, std::move(affected));
  }
  Publish(std::move(event));
  return failures;
}

// ---------------------------------------------------------------------------
// Queries

std::vector<Candidate> Lexicon::LookupWordform(std::string_view form) const {
  std::shared_lock lock(mu_);
  std::vector<Candidate> out;
  std::string key = NormalizeOrEmpty(form);
  if (key.empty()) return out;
  auto it = wordform_index_.find(key);
  if (it == wordform_index_.end()) return out;
  out.reserve(it->second.size());
  for (const EntryId& wid : it->second) out.push_back(MakeCandidate(words_.at(wid)));
  std::sort(out.begin(), out.end(),
            [this](const Candidate& a, const Candidate& b) { return CandidateLess(a, b); });
  return out;
}

std::vector<EntryId> Lexicon::LookupWordformIds(std::string_view form) const {
  std::vector<EntryId> ids;
  for (const Candidate& c : LookupWordform(form)) ids.push_back(c.word.id);
  return ids;
}

std::optional<Superlemma> Lexicon::FindSuperlemma(const EntryId& id) const {
  std::shared_lock lock(mu_);
  auto it = superlemmata_.find(id);
  if (it == superlemmata_.end()) return std::nullopt;
  return it->second;
}

std::optional<Lemma> Lexicon::FindLemma(const EntryId& id) const {
  std::shared_lock lock(mu_);
  auto it = lemmata_.find(id);
  if (it == lemmata_.end()) return std::nullopt;
  return it->second;
}

std::optional<SyntacticWord> Lexicon::FindSyntacticWord(const EntryId& id) const {
  std::shared_lock lock(mu_);
  auto it = words_.find(id);
  if (it == words_.end()) return std::nullopt;
  return it->second;
}

std::optional<Superlemma> Lexicon::FindSuperlemmaByForm(std::string_view form, PosTag pos) const {
  std::shared_lock lock(mu_);
  auto it = superlemma_keys_.find({NormalizeOrEmpty(form), pos});
  if (it == superlemma_keys_.end()) return std::nullopt;
  return superlemmata_.at(it->second);
}

std::vector<Superlemma> Lexicon::FindSuperlemmataByForm(std::string_view form) const {
  std::shared_lock lock(mu_);
  std::vector<Superlemma> out;
  std::string key = NormalizeOrEmpty(form);
  for (PosTag pos : AllPosTags()) {
    auto it = superlemma_keys_.find({key, pos});
    if (it != superlemma_keys_.end()) out.push_back(superlemmata_.at(it->second));
  }
  return out;
}

std::vector<Lemma> Lexicon::FindLemmataByForm(std::string_view form) const {
  std::shared_lock lock(mu_);
  std::vector<Lemma> out;
  std::string key = NormalizeOrEmpty(form);
  if (key.empty()) return out;
  for (const auto& [id, l] : lemmata_) {
    if (NormalizeOrEmpty(l.form) == key) out.push_back(l);
  }
  return out;
}

bool Lexicon::Contains(const EntryId& id) const {
  std::shared_lock lock(mu_);
  return superlemmata_.count(id) || lemmata_.count(id) || words_.count(id);
}

std::pair<EntryId, EntryId> Lexicon::Ancestry(const EntryId& id) const {
  std::shared_lock lock(mu_);
  if (auto it = words_.find(id); it != words_.end()) {
    const Lemma& l = lemmata_.at(it->second.lemma_id);
    return {l.id, l.superlemma_id};
  }
  if (auto it = lemmata_.find(id); it != lemmata_.end()) {
    return {it->second.id, it->second.superlemma_id};
  }
  if (superlemmata_.count(id)) return {EntryId(), id};
  throw Error(ErrorCode::kNotFound, "entry " + id + " does not exist");
}

PosTag Lexicon::PosOf(const EntryId& id) const {
  auto [lemma, superlemma] = Ancestry(id);
  std::shared_lock lock(mu_);
  return superlemmata_.at(superlemma).pos;
}

std::vector<Superlemma> Lexicon::Superlemmata() const {
  std::shared_lock lock(mu_);
  std::vector<Superlemma> out;
  out.reserve(superlemmata_.size());
  for (const auto& [id, s] : superlemmata_) out.push_back(s);
  return out;
}

std::vector<Lemma> Lexicon::LemmataOf(const EntryId& superlemma_id) const {
  std::shared_lock lock(mu_);
  std::vector<Lemma> out;
  auto it = lemmas_of_.find(superlemma_id);
  if (it == lemmas_of_.end()) return out;
  for (const EntryId& lid : it->second) out.push_back(lemmata_.at(lid));
  return out;
}

std::vector<SyntacticWord> Lexicon::SyntacticWordsOf(const EntryId& lemma_id) const {
  std::shared_lock lock(mu_);
  std::vector<SyntacticWord> out;
  auto it = words_of_.find(lemma_id);
  if (it == words_of_.end()) return out;
  for (const EntryId& wid : it->second) out.push_back(words_.at(wid));
  return out;
}

std::vector<Lemma> Lexicon::AllLemmata() const {
  std::shared_lock lock(mu_);
  std::vector<Lemma> out;
  out.reserve(lemmata_.size());
  for (const auto& [id, l] : lemmata_) out.push_back(l);
  return out;
}

std::vector<SyntacticWord> Lexicon::AllSyntacticWords() const {
  std::shared_lock lock(mu_);
  std::vector<SyntacticWord> out;
  out.reserve(words_.size());
  for (const auto& [id, w] : words_) out.push_back(w);
  return out;
}

std::vector<MultiWordUnit> Lexicon::MultiWordUnits() const {
  std::shared_lock lock(mu_);
  return mwus_;
}

std::vector<EntryRecord> Lexicon::ExportRecords() const {
  std::shared_lock lock(mu_);
  std::vector<EntryRecord> out;
  out.reserve(words_.size() + superlemmata_.size());
  for (const auto& [sid, s] : superlemmata_) {
    const auto& lemmas = lemmas_of_.at(sid);
    if (lemmas.empty()) {
      out.push_back(EntryRecord{s, std::nullopt, std::nullopt});
      continue;
    }
    for (const EntryId& lid : lemmas) {
      const Lemma& l = lemmata_.at(lid);
      const auto& words = words_of_.at(lid);
      if (words.empty()) {
        out.push_back(EntryRecord{s, l, std::nullopt});
        continue;
      }
      for (const EntryId& wid : words) out.push_back(EntryRecord{s, l, words_.at(wid)});
    }
  }
  return out;
}

size_t Lexicon::SuperlemmaCount() const {
  std::shared_lock lock(mu_);
  return superlemmata_.size();
}

size_t Lexicon::LemmaCount() const {
  std::shared_lock lock(mu_);
  return lemmata_.size();
}

size_t Lexicon::SyntacticWordCount() const {
  std::shared_lock lock(mu_);
  return words_.size();
}

size_t Lexicon::DoubleCheckedCount() const {
  std::shared_lock lock(mu_);
  return std::count_if(lemmata_.begin(), lemmata_.end(),
                       [](const auto& kv) { return kv.second.double_checked; });
}

std::vector<AuditRecord> Lexicon::AuditLog() const {
  std::shared_lock lock(mu_);
  return audit_;
}

size_t Lexicon::AuditCount() const {
  std::shared_lock lock(mu_);
  return audit_.size();
}

std::vector<LexiconEvent> Lexicon::Events() const {
  std::shared_lock lock(mu_);
  return events_;
}

uint64_t Lexicon::LastEventSeq() const {
  std::shared_lock lock(mu_);
  return counters_.next_event - 1;
}

std::vector<IntegrityViolation> Lexicon::CheckIntegrity() const {
  std::shared_lock lock(mu_);
  std::vector<IntegrityViolation> out;
  std::map<std::pair<std::string, PosTag>, EntryId> keys;
  for (const auto& [id, s] : superlemmata_) {
    if (!keys.emplace(std::make_pair(s.form, s.pos), id).second) {
      out.push_back({id, "duplicate (form, pos)"});
    }
    if (NormalizeOrEmpty(s.form) != s.form) out.push_back({id, "form is not normalized"});
  }
  std::map<EntryId, std::set<std::string>, IdLess> lemma_forms;
  for (const auto& [id, l] : lemmata_) {
    if (!superlemmata_.count(l.superlemma_id)) {
      out.push_back({id, "dangling superlemma " + l.superlemma_id});
    }
    if (!lemma_forms[l.superlemma_id].insert(l.form).second) {
      out.push_back({id, "duplicate lemma form under " + l.superlemma_id});
    }
  }
  std::set<std::tuple<EntryId, std::string, FeatureVector>> word_keys;
  for (const auto& [id, w] : words_) {
    if (!lemmata_.count(w.lemma_id)) out.push_back({id, "dangling lemma " + w.lemma_id});
    if (!word_keys.emplace(w.lemma_id, w.wordform, w.features).second) {
      out.push_back({id, "duplicate (lemma, wordform, features)"});
    }
    auto it = wordform_index_.find(NormalizeOrEmpty(w.wordform));
    if (it == wordform_index_.end() || !it->second.count(id)) {
      out.push_back({id, "missing from wordform index"});
    }
  }
  for (const auto& [key, ids] : wordform_index_) {
    for (const EntryId& wid : ids) {
      if (!words_.count(wid)) out.push_back({wid, "stale wordform index entry"});
    }
  }
  for (const auto& m : mwus_) {
    if (!superlemmata_.count(m.superlemma_id) || !words_.count(m.syntactic_word_id)) {
      out.push_back({m.superlemma_id, "dangling multi-word unit"});
    }
  }
  return out;
}

uint64_t Lexicon::Subscribe(Listener listener) {
  std::lock_guard lock(listeners_mu_);
  uint64_t handle = next_listener_++;
  listeners_[handle] = std::move(listener);
  return handle;
}

void Lexicon::Unsubscribe(uint64_t handle) {
  std::lock_guard lock(listeners_mu_);
  listeners_.erase(handle);
}

Lexicon::Counters Lexicon::counters() const {
  std::shared_lock lock(mu_);
  return counters_;
}

void Lexicon::Restore(const std::vector<EntryRecord>& records,
                      const std::vector<MultiWordUnit>& mwus,
                      const std::vector<AuditRecord>& audit, const Counters& counters) {
  std::lock_guard writer(writer_mu_);
  std::unique_lock lock(mu_);
  if (!superlemmata_.empty() || !audit_.empty()) {
    throw Error(ErrorCode::kValidation, "Restore requires an empty lexicon");
  }
  for (const EntryRecord& r : records) {
    if (r.superlemma) {
      const Superlemma& s = *r.superlemma;
      superlemmata_[s.id] = s;
      superlemma_keys_[{s.form, s.pos}] = s.id;
      lemmas_of_[s.id];
    }
    if (r.lemma) {
      const Lemma& l = *r.lemma;
      lemmata_[l.id] = l;
      lemmas_of_[l.superlemma_id].insert(l.id);
      words_of_[l.id];
      word_keys_[l.id];
    }
    if (r.word) {
      const SyntacticWord& w = *r.word;
      words_[w.id] = w;
      words_of_[w.lemma_id].insert(w.id);
      word_keys_[w.lemma_id][{w.wordform, w.features}] = w.id;
      IndexWord(w);
    }
  }
  mwus_ = mwus;
  audit_ = audit;
  counters_ = counters;
}

}  // namespace latinlex
