#include "latinlex/lemmatizer.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "latinlex/error.h"

namespace latinlex {
namespace {

uint64_t FrequencyOf(const Candidate& c, const LemmatizeOptions& options) {
  if (!options.frequencies) return c.word.corpus_frequency;
  auto it = options.frequencies->find(c.word.id);
  return it == options.frequencies->end() ? 0 : it->second;
}

AutoLink Decide(size_t index, const std::vector<Candidate>& cands,
                const LemmatizeOptions& options) {
  AutoLink link;
  link.token = index;
  if (cands.empty()) return link;  // level 0

  size_t top = 0;
  std::optional<size_t> runner;
  std::vector<uint64_t> freq(cands.size());
  for (size_t i = 0; i < cands.size(); ++i) freq[i] = FrequencyOf(cands[i], options);
  for (size_t i = 1; i < cands.size(); ++i) {
    if (freq[i] > freq[top]) top = i;
  }
  for (size_t i = 0; i < cands.size(); ++i) {
    if (i != top && (!runner || freq[i] > freq[*runner])) runner = i;
  }

  bool one_lemma = std::all_of(cands.begin(), cands.end(), [&](const Candidate& c) {
    return c.lemma.id == cands.front().lemma.id;
  });
  if (one_lemma) {
    link.chosen = cands[top].word.id;
    link.level = AnnotationLevel::kUnambiguous;
    return link;
  }
  if (freq[top] == 0) {
    link.level = AnnotationLevel::kUndecided;
    return link;
  }
  link.chosen = cands[top].word.id;
  double needed = options.margin * static_cast<double>(freq[*runner]);
  link.level = static_cast<double>(freq[top]) >= needed ? AnnotationLevel::kAutoHigh
                                                         : AnnotationLevel::kAutoLow;
  return link;
}

struct MwuPattern {
  std::vector<std::string> forms;  // normalized
  EntryId word_id;
};

std::unordered_map<std::string, std::vector<MwuPattern>> MwuPatterns(const Lexicon& lexicon) {
  std::unordered_map<std::string, std::vector<MwuPattern>> by_head;
  for (const MultiWordUnit& m : lexicon.MultiWordUnits()) {
    MwuPattern p;
    p.word_id = m.syntactic_word_id;
    for (const auto& c : m.component_forms) p.forms.push_back(lexicon.Normalize(c));
    by_head[p.forms.front()].push_back(std::move(p));
  }
  for (auto& [head, patterns] : by_head) {
    std::stable_sort(patterns.begin(), patterns.end(), [](const MwuPattern& a, const MwuPattern& b) {
      if (a.forms.size() != b.forms.size()) return a.forms.size() > b.forms.size();
      return IdLess()(a.word_id, b.word_id);
    });
  }
  return by_head;
}

}  // namespace

std::vector<AutoLink> ProposeLinks(const Lexicon& lexicon, const Document& doc,
                                   const LemmatizeOptions& options) {
  const size_t n = doc.tokens.size();
  std::vector<std::string> normalized(n);
  for (size_t i = 0; i < n; ++i) {
    if (doc.tokens[i].is_word) normalized[i] = lexicon.Normalize(doc.tokens[i].surface);
  }
  auto human = [&](size_t i) {
    return LevelValue(doc.tokens[i].link.level) >= kFirstHumanLevel;
  };

  std::vector<AutoLink> out;
  std::vector<bool> claimed(n, false);
  if (options.multiword) {
    auto patterns = MwuPatterns(lexicon);
    for (size_t i = 0; i < n && !patterns.empty(); ++i) {
      if (!doc.tokens[i].is_word) continue;
      auto it = patterns.find(normalized[i]);
      if (it == patterns.end()) continue;
      for (const MwuPattern& p : it->second) {
        size_t len = p.forms.size();
        if (i + len > n) continue;
        bool match = true;
        for (size_t k = 0; k < len && match; ++k) {
          const Token& t = doc.tokens[i + k];
          match = t.is_word && normalized[i + k] == p.forms[k] && !human(i + k);
        }
        if (!match) continue;
        for (size_t k = 0; k < len; ++k) {
          AutoLink a;
          a.token = i + k;
          a.chosen = p.word_id;
          a.level = AnnotationLevel::kUnambiguous;
          a.mwu = k == 0 ? MwuRole::kHead : MwuRole::kContinuation;
          out.push_back(a);
          claimed[i + k] = true;
        }
        i += len - 1;
        break;
      }
    }
  }

  std::unordered_map<std::string, std::vector<Candidate>> cache;
  for (size_t i = 0; i < n; ++i) {
    const Token& t = doc.tokens[i];
    if (!t.is_word || claimed[i] || human(i)) continue;
    auto [it, fresh] = cache.try_emplace(normalized[i]);
    if (fresh) it->second = lexicon.LookupWordform(normalized[i]);
    out.push_back(Decide(i, it->second, options));
  }
  std::sort(out.begin(), out.end(),
            [](const AutoLink& a, const AutoLink& b) { return a.token < b.token; });
  return out;
}

LemmatizeResult LemmatizeDocument(CorpusStore& store, const Lexicon& lexicon,
                                  const std::string& doc_id, const LemmatizeOptions& options) {
  Document doc = store.GetDocument(doc_id);
  std::vector<AutoLink> links = ProposeLinks(lexicon, doc, options);
  LemmatizeResult result;
  result.doc_id = doc_id;
  result.updated = store.ApplyAutoLinks(doc_id, links);
  for (const AutoLink& a : links) result.multiword_matches += a.mwu == MwuRole::kHead ? 1 : 0;
  Document after = store.GetDocument(doc_id);
  for (const Token& t : after.tokens) {
    if (!t.is_word) continue;
    ++result.word_tokens;
    ++result.levels[LevelValue(t.link.level)];
  }
  return result;
}

std::vector<LemmatizeResult> LemmatizeLayer(CorpusStore& store, const Lexicon& lexicon,
                                            const CorpusLayer& layer,
                                            const LemmatizeOptions& options, unsigned threads) {
  std::vector<std::string> ids = store.DocumentIds(layer);
  std::vector<LemmatizeResult> results(ids.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<size_t>(ids.size(), 1)));

  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (size_t i = next++; i < ids.size(); i = next++) {
      try {
        results[i] = LemmatizeDocument(store, lexicon, ids[i], options);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<LemmatizeResult> LemmatizeWithBootstrap(Lexicon& lexicon, CorpusStore& store,
                                                    std::string_view author, unsigned threads) {
  CorpusLayer all = CorpusLayer::Parse("reference");
  FrequencyMap none;
  LemmatizeOptions first;
  first.frequencies = &none;
  std::vector<LemmatizeResult> pass1 = LemmatizeLayer(store, lexicon, all, first, threads);
  lexicon.SetCorpusFrequencies(store.CorpusFrequency(all).syntactic_words, author);
  std::vector<LemmatizeResult> pass2 = LemmatizeLayer(store, lexicon, all, {}, threads);
  // Both passes run over the same documents in the same order.
  for (size_t i = 0; i < pass2.size() && i < pass1.size(); ++i) pass2[i].updated += pass1[i].updated;
  return pass2;
}

}  // namespace latinlex
