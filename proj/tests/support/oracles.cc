#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <set>
#include <stdexcept>

namespace latinlex::testing {
namespace {

double Percent(size_t part, size_t whole) {
  if (whole == 0) return 0;
  return std::round(static_cast<double>(part) * 10000.0 / static_cast<double>(whole)) / 100.0;
}

bool Counted(const Token& t) {
  return t.is_word && t.link.chosen && static_cast<int>(t.link.level) >= 3;
}

}  // namespace

CoverageOracleResult CoverageOracle(const std::vector<Document>& docs, const Lexicon& lexicon) {
  CoverageOracleResult r;
  std::set<std::string> words, lemmata, superlemmata;
  for (const Document& d : docs) {
    for (const Token& t : d.tokens) {
      if (!t.is_word) continue;
      ++r.token_total;
      if (!lexicon.LookupWordform(t.surface).empty()) {
        ++r.tokens_mapped;
      } else {
        ++r.tokens_unassigned;
      }
      if (!Counted(t)) continue;
      auto w = lexicon.FindSyntacticWord(*t.link.chosen);
      if (!w) continue;
      auto l = lexicon.FindLemma(w->lemma_id);
      words.insert(w->id);
      lemmata.insert(l->id);
      superlemmata.insert(l->superlemma_id);
    }
  }
  r.syntactic_words_used = words.size();
  r.lemmata_used = lemmata.size();
  r.superlemmata_used = superlemmata.size();
  r.syntactic_words_total = lexicon.AllSyntacticWords().size();
  r.lemmata_total = lexicon.AllLemmata().size();
  r.superlemmata_total = lexicon.Superlemmata().size();
  r.tokens_mapped_pct = Percent(r.tokens_mapped, r.token_total);
  r.tokens_unassigned_pct = Percent(r.tokens_unassigned, r.token_total);
  r.superlemmata_used_pct = Percent(r.superlemmata_used, r.superlemmata_total);
  r.lemmata_used_pct = Percent(r.lemmata_used, r.lemmata_total);
  r.syntactic_words_used_pct = Percent(r.syntactic_words_used, r.syntactic_words_total);
  return r;
}

std::map<EntryId, uint64_t> CurveWeightsOracle(const std::vector<Document>& docs,
                                               const Lexicon& lexicon) {
  std::map<EntryId, uint64_t> out;
  for (const Document& d : docs) {
    for (const Token& t : d.tokens) {
      if (Counted(t) && lexicon.FindSyntacticWord(*t.link.chosen)) ++out[*t.link.chosen];
    }
  }
  return out;
}

uint64_t WordTokenCount(const std::vector<Document>& docs) {
  uint64_t n = 0;
  for (const Document& d : docs) {
    for (const Token& t : d.tokens) n += t.is_word;
  }
  return n;
}

std::optional<size_t> ExhaustiveMinimumCount(const std::vector<uint64_t>& weights, uint64_t total,
                                             double p) {
  if (weights.size() > 20) throw std::invalid_argument("too many weights for exhaustive search");
  std::optional<size_t> best;
  for (uint32_t mask = 1; mask < (1u << weights.size()); ++mask) {
    uint64_t sum = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
      if (mask & (1u << i)) sum += weights[i];
    }
    if (100.0 * static_cast<double>(sum) >= p * static_cast<double>(total)) {
      size_t size = static_cast<size_t>(__builtin_popcount(mask));
      if (!best || size < *best) best = size;
    }
  }
  return best;
}

std::optional<size_t> GreedyMinimumCount(std::vector<uint64_t> weights, uint64_t total, double p) {
  std::sort(weights.rbegin(), weights.rend());
  uint64_t sum = 0;
  for (size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0) break;
    sum += weights[k];
    if (100.0 * static_cast<double>(sum) >= p * static_cast<double>(total)) return k + 1;
  }
  return std::nullopt;
}

double Round6Oracle(long double x) {
  // From the exact decimal expansion (glibc prints binary fractions
  // exactly), half away from zero on the seventh decimal.
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.120Lf", std::fabs(x));
  const char* dot = std::strchr(buf, '.');
  long long k = std::atoll(buf);
  for (int i = 1; i <= 6; ++i) k = k * 10 + (dot[i] - '0');
  if (dot[7] >= '5') ++k;
  double r = static_cast<double>(k) / 1000000.0;
  if (r == 0) return 0.0;
  return x < 0 ? -r : r;
}

namespace {

long double CosineLd(const EmbeddingSpace& space, size_t a, size_t b) {
  long double dot = 0, na = 0, nb = 0;
  auto ra = space.Row(a);
  auto rb = space.Row(b);
  for (size_t i = 0; i < space.dim(); ++i) {
    dot += static_cast<long double>(ra[i]) * rb[i];
    na += static_cast<long double>(ra[i]) * ra[i];
    nb += static_cast<long double>(rb[i]) * rb[i];
  }
  if (na == 0 || nb == 0) return 0;
  long double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0L, 1.0L);
}

}  // namespace

OracleGraph GraphOracle(const EmbeddingSpace& space, const std::string& seed, size_t m, double tau) {
  size_t seed_index = space.size();
  for (size_t i = 0; i < space.size(); ++i) {
    if (space.vocabulary()[i] == seed) seed_index = i;
  }
  if (seed_index == space.size()) throw std::invalid_argument("seed not in vocabulary");
  std::vector<std::pair<long double, size_t>> all;
  for (size_t i = 0; i < space.size(); ++i) {
    if (i != seed_index) all.emplace_back(CosineLd(space, seed_index, i), i);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (all.size() > m) all.resize(m);
  OracleGraph g;
  std::vector<size_t> rows = {seed_index};
  g.nodes.push_back(seed);
  g.sims.push_back(1.0);
  for (const auto& [sim, i] : all) {
    rows.push_back(i);
    g.nodes.push_back(space.vocabulary()[i]);
    g.sims.push_back(Round6Oracle(sim));
  }
  for (size_t s = 0; s < rows.size(); ++s) {
    for (size_t t = s + 1; t < rows.size(); ++t) {
      double w = Round6Oracle(CosineLd(space, rows[s], rows[t]));
      if (w >= tau) g.edges.push_back({s, t, w});
    }
  }
  return g;
}

double NegativeSamplingLossOracle(const std::vector<std::vector<double>>& inputs,
                                  const std::vector<std::vector<double>>& outputs,
                                  const std::vector<int>& labels) {
  size_t dim = inputs.front().size();
  std::vector<double> h(dim, 0.0);
  for (const auto& in : inputs) {
    for (size_t i = 0; i < dim; ++i) h[i] += in[i] / static_cast<double>(inputs.size());
  }
  double loss = 0;
  for (size_t j = 0; j < outputs.size(); ++j) {
    double score = 0;
    for (size_t i = 0; i < dim; ++i) score += outputs[j][i] * h[i];
    // log(sigmoid(x)) = -log(1 + exp(-x))
    double pos = -std::log1p(std::exp(-score));
    double neg = -std::log1p(std::exp(score));
    loss -= labels[j] ? pos : neg;
  }
  return loss;
}

}  // namespace latinlex::testing
