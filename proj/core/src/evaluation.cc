#include "latinlex/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>

#include "json.hpp"
#include "latinlex/error.h"
#include "latinlex/lexicon_io.h"
#include "latinlex/text.h"

namespace latinlex {
namespace {

std::string LemmaField(std::string_view field) {
  std::string_view t = Trim(field);
  if (t == "_") return {};
  return std::string(t);
}

std::string PadRight(const std::string& s, size_t width) {
  // Width in codepoints so that macrons do not skew the columns.
  size_t cps = DecodeUtf8(s).size();
  return cps >= width ? s : s + std::string(width - cps, ' ');
}

}  // namespace

std::vector<LemmaToken> ParseLemmaTsv(std::string_view text) {
  std::vector<LemmaToken> out;
  std::vector<std::string> lines = Split(text, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) {
      if (!out.empty()) out.back().sentence_end = true;
      continue;
    }
    if (line.front() == '#') continue;
    std::vector<std::string> f = Split(line, '\t');
    if (f.size() > 3 || Trim(f[0]).empty()) {
      throw Error(ErrorCode::kParse, "expected surface, lemma, pos", "line " + std::to_string(i + 1));
    }
    LemmaToken t;
    t.surface = std::string(Trim(f[0]));
    if (f.size() > 1) t.lemma = LemmaField(f[1]);
    if (f.size() > 2) t.pos = LemmaField(f[2]);
    out.push_back(std::move(t));
  }
  if (!out.empty()) out.back().sentence_end = true;
  return out;
}

std::vector<LemmaToken> ReadLemmaTsv(const std::string& path) {
  try {
    return ParseLemmaTsv(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw Error(e.code(), e.what(), path + ":" + e.location());
    throw;
  }
}

std::string FormatLemmaTsv(const std::vector<LemmaToken>& tokens) {
  std::string out;
  for (const LemmaToken& t : tokens) {
    out += t.surface + "\t" + (t.lemma.empty() ? "_" : t.lemma) + "\t" +
           (t.pos.empty() ? "_" : t.pos) + "\n";
    if (t.sentence_end) out += "\n";
  }
  return out;
}

std::vector<LemmaToken> DocumentPredictions(const CorpusStore& store, const Lexicon& lexicon,
                                            std::string_view doc_id) {
  Document doc = store.GetDocument(doc_id);
  std::vector<LemmaToken> out;
  std::map<EntryId, std::pair<std::string, std::string>, IdLess> cache;
  for (const Token& t : doc.tokens) {
    if (!t.is_word) {
      // Sentence punctuation closes a sentence in the exported file.
      if ((t.surface == "." || t.surface == "?" || t.surface == "!") && !out.empty()) {
        out.back().sentence_end = true;
      }
      continue;
    }
    LemmaToken row;
    row.surface = t.surface;
    if (t.link.chosen && LevelValue(t.link.level) >= kFirstCountedLevel) {
      auto it = cache.find(*t.link.chosen);
      if (it == cache.end()) {
        std::pair<std::string, std::string> value;
        if (auto word = lexicon.FindSyntacticWord(*t.link.chosen)) {
          if (auto lemma = lexicon.FindLemma(word->lemma_id)) value.first = lemma->form;
          value.second = std::string(PosTagName(lexicon.PosOf(word->id)));
        }
        it = cache.emplace(*t.link.chosen, value).first;
      }
      row.lemma = it->second.first;
      row.pos = it->second.second;
    }
    out.push_back(std::move(row));
  }
  if (!out.empty()) out.back().sentence_end = true;
  return out;
}

std::vector<OverrideRule> ParseOverrideTable(std::string_view text) {
  std::vector<OverrideRule> rules;
  std::map<std::pair<std::string, std::string>, size_t> seen;
  std::vector<std::string> lines = Split(text, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> f = Split(line, '\t');
    std::string where = "line " + std::to_string(i + 1);
    if (f.size() != 3) throw Error(ErrorCode::kParse, "expected form, predicted, replacement", where);
    OverrideRule r{std::string(Trim(f[0])), std::string(Trim(f[1])), std::string(Trim(f[2])), 0};
    if (rules.empty() && seen.empty() && r.form == "form" && r.predicted == "predicted") continue;
    if (r.form.empty() || r.predicted.empty() || r.replacement.empty()) {
      throw Error(ErrorCode::kParse, "empty override field", where);
    }
    if (!seen.emplace(std::make_pair(r.form, r.predicted), i + 1).second) {
      throw Error(ErrorCode::kValidation,
                  "rule for (" + r.form + ", " + r.predicted + ") is repeated", where);
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

std::vector<OverrideRule> ReadOverrideTable(const std::string& path) {
  try {
    return ParseOverrideTable(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), e.what(), path + ":" + e.location());
  }
}

std::vector<LemmaToken> ApplyOverrideTable(const std::vector<LemmaToken>& predictions,
                                           std::vector<OverrideRule>& table) {
  std::map<std::pair<std::string_view, std::string_view>, OverrideRule*> index;
  for (OverrideRule& r : table) index[{r.form, r.predicted}] = &r;
  std::vector<LemmaToken> out = predictions;
  if (index.empty()) return out;
  for (LemmaToken& t : out) {
    if (t.lemma.empty()) continue;
    auto it = index.find({t.surface, t.lemma});
    if (it == index.end()) continue;
    t.lemma = it->second->replacement;
    ++it->second->hit_count;
  }
  return out;
}

EvaluationReport Evaluate(const std::vector<LemmaToken>& predictions,
                          const std::vector<LemmaToken>& gold) {
  if (predictions.size() != gold.size()) {
    throw Error(ErrorCode::kValidation, "prediction has " + std::to_string(predictions.size()) +
                                            " tokens, gold has " + std::to_string(gold.size()));
  }
  EvaluationReport r;
  r.tokens = gold.size();
  std::map<std::tuple<std::string, std::string, std::string>, uint64_t> errors;
  for (size_t i = 0; i < gold.size(); ++i) {
    const LemmaToken& p = predictions[i];
    const LemmaToken& g = gold[i];
    if (p.surface != g.surface) {
      throw Error(ErrorCode::kValidation, "token " + std::to_string(i + 1) + " is '" + p.surface +
                                              "' in the prediction and '" + g.surface +
                                              "' in the gold data");
    }
    bool assigned = !p.lemma.empty();
    bool bearing = !g.lemma.empty();
    r.assigned += assigned;
    r.gold_bearing += bearing;
    if (assigned && bearing) {
      if (p.lemma == g.lemma) {
        ++r.correct;
      } else {
        ++errors[{g.surface, g.lemma, p.lemma}];
      }
    }
  }
  r.precision = r.assigned ? static_cast<double>(r.correct) / static_cast<double>(r.assigned) : 0;
  r.recall =
      r.gold_bearing ? static_cast<double>(r.correct) / static_cast<double>(r.gold_bearing) : 0;
  double sum = r.precision + r.recall;
  r.f1 = sum > 0 ? 2 * r.precision * r.recall / sum : 0;
  for (const auto& [key, count] : errors) {
    r.confusions.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), count});
  }
  std::stable_sort(r.confusions.begin(), r.confusions.end(),
                   [](const ConfusionEntry& a, const ConfusionEntry& b) { return a.count > b.count; });
  return r;
}

std::string EvaluationReport::ToJson(size_t max_confusions) const {
  nlohmann::ordered_json j;
  j["tokens"] = tokens;
  j["assigned"] = assigned;
  j["gold_bearing"] = gold_bearing;
  j["correct"] = correct;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  auto rows = nlohmann::ordered_json::array();
  for (size_t i = 0; i < confusions.size() && i < max_confusions; ++i) {
    const ConfusionEntry& c = confusions[i];
    rows.push_back({{"form", c.form}, {"gold", c.gold}, {"predicted", c.predicted},
                    {"count", c.count}});
  }
  j["confusions"] = std::move(rows);
  return j.dump(2);
}

std::string EvaluationReport::ToText(size_t max_confusions) const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "precision %.4f  recall %.4f  f1 %.4f  (%zu/%zu assigned, %zu gold)\n",
                precision, recall, f1, correct, assigned, gold_bearing);
  std::string out = buf;
  size_t n = std::min(max_confusions, confusions.size());
  if (n == 0) return out;
  size_t wf = 4, wg = 4, wp = 9;
  for (size_t i = 0; i < n; ++i) {
    wf = std::max(wf, DecodeUtf8(confusions[i].form).size());
    wg = std::max(wg, DecodeUtf8(confusions[i].gold).size());
    wp = std::max(wp, DecodeUtf8(confusions[i].predicted).size());
  }
  out += PadRight("form", wf + 2) + PadRight("gold", wg + 2) + PadRight("predicted", wp + 2) +
         "count\n";
  for (size_t i = 0; i < n; ++i) {
    const ConfusionEntry& c = confusions[i];
    out += PadRight(c.form, wf + 2) + PadRight(c.gold, wg + 2) + PadRight(c.predicted, wp + 2) +
           std::to_string(c.count) + "\n";
  }
  return out;
}

}  // namespace latinlex
