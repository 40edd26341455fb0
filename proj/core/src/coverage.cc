#include "latinlex/coverage.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

#include "json.hpp"
#include "latinlex/error.h"

namespace latinlex {

double RoundPercent(size_t part, size_t whole) {
  if (whole == 0) return 0;
  return std::round(10000.0 * static_cast<double>(part) / static_cast<double>(whole)) / 100.0;
}

CoverageReport ComputeCoverage(const CorpusStore& store, const Lexicon& lexicon,
                               const CorpusLayer& layer) {
  CoverageReport r;
  r.layer = layer.id;
  std::set<EntryId, IdLess> words;
  store.ForEachDocument(layer, [&](const Document& doc) {
    for (const Token& t : doc.tokens) {
      if (!t.is_word) continue;
      ++r.token_total;
      if (!t.link.candidates.empty()) ++r.tokens_mapped;
      if (t.link.chosen && LevelValue(t.link.level) >= kFirstCountedLevel) {
        words.insert(*t.link.chosen);
      }
    }
  });
  std::set<EntryId, IdLess> lemmata, superlemmata;
  for (auto it = words.begin(); it != words.end();) {
    if (!lexicon.Contains(*it)) {
      it = words.erase(it);
      continue;
    }
    auto [lemma, superlemma] = lexicon.Ancestry(*it);
    lemmata.insert(lemma);
    superlemmata.insert(superlemma);
    ++it;
  }
  r.tokens_unassigned = r.token_total - r.tokens_mapped;
  r.superlemmata_total = lexicon.SuperlemmaCount();
  r.lemmata_total = lexicon.LemmaCount();
  r.syntactic_words_total = lexicon.SyntacticWordCount();
  r.superlemmata_used = superlemmata.size();
  r.lemmata_used = lemmata.size();
  r.syntactic_words_used = words.size();
  r.tokens_mapped_pct = RoundPercent(r.tokens_mapped, r.token_total);
  r.tokens_unassigned_pct = RoundPercent(r.tokens_unassigned, r.token_total);
  r.superlemmata_used_pct = RoundPercent(r.superlemmata_used, r.superlemmata_total);
  r.lemmata_used_pct = RoundPercent(r.lemmata_used, r.lemmata_total);
  r.syntactic_words_used_pct = RoundPercent(r.syntactic_words_used, r.syntactic_words_total);
  return r;
}

std::string CoverageReport::ToJson() const {
  nlohmann::ordered_json j;
  j["layer"] = layer;
  j["token_total"] = token_total;
  j["tokens_mapped"] = tokens_mapped;
  j["tokens_mapped_pct"] = tokens_mapped_pct;
  j["tokens_unassigned"] = tokens_unassigned;
  j["tokens_unassigned_pct"] = tokens_unassigned_pct;
  j["superlemmata_total"] = superlemmata_total;
  j["superlemmata_used"] = superlemmata_used;
  j["superlemmata_used_pct"] = superlemmata_used_pct;
  j["lemmata_total"] = lemmata_total;
  j["lemmata_used"] = lemmata_used;
  j["lemmata_used_pct"] = lemmata_used_pct;
  j["syntactic_words_total"] = syntactic_words_total;
  j["syntactic_words_used"] = syntactic_words_used;
  j["syntactic_words_used_pct"] = syntactic_words_used_pct;
  return j.dump(2);
}

std::string CoverageReport::ToText() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "layer            %s\n"
                "tokens           %zu\n"
                "mapped           %zu  %.2f%%\n"
                "unassigned       %zu  %.2f%%\n"
                "superlemmata     %zu / %zu  %.2f%%\n"
                "lemmata          %zu / %zu  %.2f%%\n"
                "syntactic words  %zu / %zu  %.2f%%\n",
                layer.c_str(), token_total, tokens_mapped, tokens_mapped_pct, tokens_unassigned,
                tokens_unassigned_pct, superlemmata_used, superlemmata_total,
                superlemmata_used_pct, lemmata_used, lemmata_total, lemmata_used_pct,
                syntactic_words_used, syntactic_words_total, syntactic_words_used_pct);
  return buf;
}

std::vector<CurvePoint> CurveFromWeights(std::vector<uint64_t> weights, uint64_t total,
                                         const std::vector<double>& grid) {
  for (double p : grid) {
    if (!(p > 0 && p <= 100)) {
      throw Error(ErrorCode::kValidation, "curve percentages must lie in (0, 100]");
    }
  }
  weights.erase(std::remove(weights.begin(), weights.end(), 0), weights.end());
  std::sort(weights.begin(), weights.end(), std::greater<>());
  std::vector<uint64_t> prefix(weights.size() + 1, 0);
  for (size_t i = 0; i < weights.size(); ++i) prefix[i + 1] = prefix[i] + weights[i];
  if (prefix.back() > total) {
    throw Error(ErrorCode::kValidation, "covered tokens exceed the token total");
  }
  auto share = [&](size_t k) {
    return total ? 100.0 * static_cast<double>(prefix[k]) / static_cast<double>(total) : 0.0;
  };

  std::vector<CurvePoint> out;
  for (double p : grid) {
    CurvePoint pt;
    pt.percent = p;
    // cum / total >= p / 100, compared without dividing
    double need = p * static_cast<double>(total);
    auto it = std::find_if(prefix.begin() + 1, prefix.end(), [&](uint64_t cum) {
      return 100.0 * static_cast<double>(cum) >= need;
    });
    if (it != prefix.end()) {
      size_t k = static_cast<size_t>(it - prefix.begin());
      pt.count = k;
      pt.achieved = share(k);
    }
    out.push_back(pt);
  }
  if (!weights.empty()) {
    CurvePoint end;
    end.percent = share(weights.size());
    end.count = weights.size();
    end.achieved = end.percent;
    end.terminal = true;
    out.push_back(end);
  }
  return out;
}

std::vector<double> DefaultPercentGrid() {
  std::vector<double> grid;
  for (int p = 1; p <= 100; ++p) grid.push_back(p);
  return grid;
}

std::vector<CurvePoint> CoverageCurve(const CorpusStore& store, const Lexicon& lexicon,
                                      const CorpusLayer& layer, const std::vector<double>& grid) {
  std::map<EntryId, uint64_t, IdLess> counts;
  uint64_t total = 0;
  store.ForEachDocument(layer, [&](const Document& doc) {
    for (const Token& t : doc.tokens) {
      if (!t.is_word) continue;
      ++total;
      if (t.link.chosen && LevelValue(t.link.level) >= kFirstCountedLevel) {
        ++counts[*t.link.chosen];
      }
    }
  });
  std::vector<uint64_t> weights;
  for (const auto& [id, n] : counts) {
    if (lexicon.Contains(id)) weights.push_back(n);
  }
  return CurveFromWeights(std::move(weights), total, grid);
}

std::string CurveToJson(const std::string& layer, const std::vector<CurvePoint>& curve) {
  nlohmann::ordered_json j;
  j["layer"] = layer;
  auto points = nlohmann::ordered_json::array();
  for (const CurvePoint& p : curve) {
    nlohmann::ordered_json jp;
    jp["percent"] = p.percent;
    jp["count"] = p.count ? nlohmann::ordered_json(*p.count) : nlohmann::ordered_json(nullptr);
    jp["reachable"] = p.count.has_value();
    jp["achieved"] = p.achieved;
    if (p.terminal) jp["terminal"] = true;
    points.push_back(std::move(jp));
  }
  j["points"] = std::move(points);
  return j.dump(2);
}

}  // namespace latinlex
