#include "latinlex/morphology.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <mutex>

#include "latinlex/error.h"
#include "latinlex/lexicon_io.h"
#include "latinlex/text.h"

namespace latinlex {
namespace {

namespace fs = std::filesystem;

std::string Lower(std::string_view s) {
  std::u32string u = DecodeUtf8(s);
  for (char32_t& c : u) c = ToLowerLatin(c);
  return EncodeUtf8(u);
}

size_t ParseIndex(std::string_view text, const std::string& where) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::kParse, "bad part index '" + std::string(text) + "'", where);
  }
  return static_cast<size_t>(std::stoul(std::string(text)));
}

StemRule ParseStemRule(std::string_view spec, const std::string& where) {
  auto eq = spec.find('=');
  auto colon = spec.find(':');
  if (eq == std::string_view::npos || colon == std::string_view::npos || colon < eq) {
    throw Error(ErrorCode::kParse, "bad stem rule '" + std::string(spec) + "'", where);
  }
  StemRule r;
  r.name = std::string(Trim(spec.substr(0, eq)));
  r.part = ParseIndex(Trim(spec.substr(eq + 1, colon - eq - 1)), where);
  for (const std::string& s : Split(spec.substr(colon + 1), '|')) {
    if (!s.empty()) r.strip.push_back(s);
  }
  if (r.name.empty() || r.strip.empty()) {
    throw Error(ErrorCode::kParse, "bad stem rule '" + std::string(spec) + "'", where);
  }
  return r;
}

bool IsNominalSubparadigm(const FeatureVector& fv) {
  auto mood = fv.get(Feature::kMood);
  return mood && (*mood == "part" || *mood == "gerundive" || *mood == "ger" || *mood == "supine");
}

bool Included(const ParadigmCell& cell, const ExpansionOptions& options) {
  if (cell.gap) return false;
  if (!options.nominal_subparadigms && IsNominalSubparadigm(cell.features)) return false;
  if (!options.vocative && cell.features.get(Feature::kCase) == "voc") return false;
  return true;
}

std::string DeriveStem(const StemRule& rule, const std::vector<std::string>& parts,
                       const std::string& class_id) {
  const std::string& source = parts[rule.part];
  std::string lower = Lower(source);
  for (const std::string& s : rule.strip) {
    if (lower.size() > s.size() && EndsWith(lower, s)) {
      return source.substr(0, source.size() - s.size());
    }
  }
  throw Error(ErrorCode::kExpansion, "stem rule " + rule.ToString() + " of " + class_id +
                                         " does not match '" + source + "'");
}

void ValidateClass(const ParadigmClass& cls) {
  std::set<FeatureVector> seen;
  for (const ParadigmCell& cell : cls.cells) {
    ValidateFeatures(cls.table_pos, cell.features);
    if (!seen.insert(cell.features).second) {
      throw Error(ErrorCode::kValidation,
                  cls.id + ": repeated cell " + cell.features.ToString());
    }
    switch (cell.ending.kind) {
      case Ending::Kind::kStem:
        if (std::none_of(cls.stem_rules.begin(), cls.stem_rules.end(),
                         [&](const StemRule& r) { return r.name == cell.ending.stem; })) {
          throw Error(ErrorCode::kValidation,
                      cls.id + ": cell " + cell.features.ToString() + " uses unknown stem '" +
                          cell.ending.stem + "'");
        }
        break;
      case Ending::Kind::kPart:
        if (cell.ending.part >= cls.part_names.size()) {
          throw Error(ErrorCode::kValidation, cls.id + ": cell " + cell.features.ToString() +
                                                  " refers to a missing principal part");
        }
        break;
      default:
        break;
    }
  }
  for (const StemRule& r : cls.stem_rules) {
    if (r.part >= cls.part_names.size()) {
      throw Error(ErrorCode::kValidation,
                  cls.id + ": stem rule " + r.ToString() + " refers to a missing part");
    }
  }
}

}  // namespace

Ending Ending::Parse(std::string_view spec) {
  Ending e;
  spec = Trim(spec);
  if (spec.empty()) throw Error(ErrorCode::kParse, "empty ending");
  if (spec == "-") {
    e.kind = Kind::kGap;
  } else if (spec[0] == '@') {
    e.kind = Kind::kPart;
    e.part = ParseIndex(spec.substr(1), "");
  } else if (spec[0] == '=') {
    e.kind = Kind::kLiteral;
    e.text = std::string(spec.substr(1));
    if (e.text.empty()) throw Error(ErrorCode::kParse, "empty literal form");
  } else {
    auto plus = spec.find('+');
    if (plus == std::string_view::npos || plus == 0) {
      throw Error(ErrorCode::kParse, "ending '" + std::string(spec) + "' has no stem");
    }
    e.kind = Kind::kStem;
    e.stem = std::string(spec.substr(0, plus));
    e.text = std::string(spec.substr(plus + 1));
  }
  return e;
}

std::string Ending::ToString() const {
  switch (kind) {
    case Kind::kStem: return stem + "+" + text;
    case Kind::kPart: return "@" + std::to_string(part);
    case Kind::kLiteral: return "=" + text;
    case Kind::kGap: return "-";
  }
  return "-";
}

std::string StemRule::ToString() const {
  return name + "=" + std::to_string(part) + ":" + Join(strip, "|");
}

bool ParadigmClass::AcceptsPos(PosTag p) const {
  return pos.empty() || std::find(pos.begin(), pos.end(), p) != pos.end();
}

ParadigmRegistry ParadigmRegistry::Load(const std::string& dir) {
  ParadigmRegistry reg;
  const std::string manifest_path = dir + "/manifest.tsv";
  std::vector<std::string> lines = Split(ReadFile(manifest_path), '\n');
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string where = manifest_path + ":" + std::to_string(i + 1);
    if (Trim(lines[i]).empty()) continue;
    std::vector<std::string> f = Split(lines[i], '\t');
    if (f.size() != 5) throw Error(ErrorCode::kParse, "expected 5 columns", where);
    ParadigmClass cls;
    cls.id = f[0];
    if (f[1] != "*") {
      for (const std::string& p : Split(f[1], ',')) cls.pos.push_back(ParsePosTag(p));
    }
    cls.part_names = Split(f[2], ',');
    if (!f[3].empty()) {
      for (const std::string& r : Split(f[3], ';')) cls.stem_rules.push_back(ParseStemRule(r, where));
    }
    cls.description = f[4];
    if (!reg.classes_.emplace(cls.id, std::move(cls)).second) {
      throw Error(ErrorCode::kParse, "class '" + f[0] + "' declared twice", where);
    }
  }

  std::vector<fs::path> tables;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir + "/tables", ec)) {
    if (entry.path().extension() == ".tsv") tables.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::kIo, "cannot list " + dir + "/tables: " + ec.message());
  std::sort(tables.begin(), tables.end());

  for (const fs::path& path : tables) {
    std::vector<std::string> rows = Split(ReadFile(path.string()), '\n');
    for (size_t i = 1; i < rows.size(); ++i) {
      std::string where = path.string() + ":" + std::to_string(i + 1);
      if (Trim(rows[i]).empty()) continue;
      std::vector<std::string> f = Split(rows[i], '\t');
      if (f.size() != 5) throw Error(ErrorCode::kParse, "expected 5 columns", where);
      auto it = reg.classes_.find(f[0]);
      if (it == reg.classes_.end()) {
        throw Error(ErrorCode::kParse, "class '" + f[0] + "' missing from the manifest", where);
      }
      ParadigmClass& cls = it->second;
      ParadigmCell cell;
      try {
        PosTag p = ParsePosTag(f[1]);
        if (cls.cells.empty()) {
          cls.table_pos = p;
        } else if (p != cls.table_pos) {
          throw Error(ErrorCode::kParse, "mixed parts of speech in class " + cls.id);
        }
        cell.features = FeatureVector::Parse(f[2]);
        cell.ending = Ending::Parse(f[3]);
      } catch (const Error& e) {
        throw Error(ErrorCode::kParse, e.what(), where);
      }
      if (f[4] != "0" && f[4] != "1") throw Error(ErrorCode::kParse, "gap_flag must be 0 or 1", where);
      cell.gap = f[4] == "1";
      if (cell.gap != (cell.ending.kind == Ending::Kind::kGap)) {
        throw Error(ErrorCode::kParse, "gap_flag disagrees with ending '" + f[3] + "'", where);
      }
      cls.cells.push_back(std::move(cell));
    }
  }

  for (auto& [id, cls] : reg.classes_) {
    if (cls.cells.empty()) throw Error(ErrorCode::kValidation, "class " + id + " has no cells");
    ValidateClass(cls);
  }
  return reg;
}

const ParadigmRegistry& ParadigmRegistry::Default() {
  static const ParadigmRegistry reg = Load(DefaultDataDir() + "/paradigms");
  return reg;
}

const ParadigmClass& ParadigmRegistry::Get(std::string_view id) const {
  if (const ParadigmClass* c = Find(id)) return *c;
  throw Error(ErrorCode::kNotFound, "unknown paradigm class '" + std::string(id) + "'");
}

const ParadigmClass* ParadigmRegistry::Find(std::string_view id) const {
  auto it = classes_.find(id);
  return it == classes_.end() ? nullptr : &it->second;
}

std::vector<std::string> ParadigmRegistry::ClassIds() const {
  std::vector<std::string> ids;
  for (const auto& [id, cls] : classes_) ids.push_back(id);
  return ids;
}

std::string DefaultDataDir() {
  if (const char* env = std::getenv("LATINLEX_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return LATINLEX_DEFAULT_DATA_DIR;
}

std::vector<std::string> ClassifyParadigm(PosTag pos, const std::vector<std::string>& raw) {
  if (raw.empty() || Trim(raw[0]).empty()) {
    throw Error(ErrorCode::kValidation, "no principal parts given");
  }
  std::vector<std::string> parts;
  for (const std::string& p : raw) parts.push_back(Lower(Trim(p)));
  auto part = [&](size_t i) -> const std::string* {
    return i < parts.size() && !parts[i].empty() && parts[i] != "-" ? &parts[i] : nullptr;
  };

  switch (pos) {
    case PosTag::kNN:
    case PosTag::kNE:
    case PosTag::kNP: {
      const std::string* gen = part(1);
      if (gen == nullptr) {
        throw Error(ErrorCode::kClassification,
                    "no genitive given for '" + parts[0] + "'; choose the declension manually");
      }
      const std::string& nom = parts[0];
      if (EndsWith(*gen, "ae")) return {"noun-decl-1"};
      if (EndsWith(*gen, "ei")) return {"noun-decl-5"};
      if (EndsWith(*gen, "is")) {
        if (EndsWith(nom, "men") || EndsWith(nom, "ma")) return {"noun-decl-3n"};
        return {"noun-decl-3"};
      }
      if (EndsWith(*gen, "us")) return {"noun-decl-4"};
      if (EndsWith(*gen, "i")) return {EndsWith(nom, "um") ? "noun-decl-2n" : "noun-decl-2"};
      break;
    }
    case PosTag::kADJ:
      if (EndsWith(parts[0], "us") &&
          (part(1) == nullptr || EndsWith(*part(1), "a"))) {
        return {"adj-1-2"};
      }
      break;
    case PosTag::kV: {
      static const std::map<std::string, std::string> kIrregular = {
          {"sum", "verb-irr-esse"},  {"esse", "verb-irr-esse"},  {"possum", "verb-irr-posse"},
          {"posse", "verb-irr-posse"}, {"eo", "verb-irr-ire"},   {"ire", "verb-irr-ire"},
          {"volo", "verb-irr-velle"}, {"velle", "verb-irr-velle"}, {"fero", "verb-irr-ferre"},
          {"ferre", "verb-irr-ferre"}};
      for (size_t i : {size_t{0}, size_t{1}}) {
        if (const std::string* p = part(i)) {
          if (auto it = kIrregular.find(*p); it != kIrregular.end()) return {it->second};
        }
      }
      const std::string* inf = part(1);
      if (inf == nullptr) {
        throw Error(ErrorCode::kClassification,
                    "no infinitive given for '" + parts[0] + "'; choose the conjugation manually");
      }
      if (EndsWith(*inf, "are") || EndsWith(*inf, "āre")) return {"verb-conj-1"};
      if (EndsWith(*inf, "ēre")) return {"verb-conj-2"};
      if (EndsWith(*inf, "ire") || EndsWith(*inf, "īre")) return {"verb-conj-4"};
      if (EndsWith(*inf, "ere")) {
        // Unmarked -ere is either conjugation; the 1sg present decides.
        if (EndsWith(parts[0], "eo")) return {"verb-conj-2"};
        if (EndsWith(parts[0], "o")) return {"verb-conj-3"};
        return {"verb-conj-2", "verb-conj-3"};
      }
      break;
    }
    default:
      return {"indeclinable"};
  }
  throw Error(ErrorCode::kClassification, "no paradigm rule matches " +
                                              std::string(PosTagName(pos)) + " (" +
                                              Join(parts, ", ") + ")");
}

std::vector<NewForm> GenerateForms(const ParadigmClass& cls, const std::vector<std::string>& raw,
                                   const ExpansionOptions& options) {
  if (raw.size() != cls.part_names.size()) {
    throw Error(ErrorCode::kValidation,
                cls.id + " needs " + std::to_string(cls.part_names.size()) +
                    " principal parts (" + Join(cls.part_names, ", ") + "), got " +
                    std::to_string(raw.size()));
  }
  std::vector<std::string> parts;
  for (const std::string& p : raw) parts.emplace_back(Trim(p));

  std::map<std::string, std::string> stems;
  std::vector<NewForm> out;
  for (const ParadigmCell& cell : cls.cells) {
    if (!Included(cell, options)) continue;
    NewForm form;
    form.features = cell.features;
    switch (cell.ending.kind) {
      case Ending::Kind::kStem: {
        auto it = stems.find(cell.ending.stem);
        if (it == stems.end()) {
          auto rule = std::find_if(cls.stem_rules.begin(), cls.stem_rules.end(),
                                   [&](const StemRule& r) { return r.name == cell.ending.stem; });
          it = stems.emplace(cell.ending.stem, DeriveStem(*rule, parts, cls.id)).first;
        }
        form.wordform = it->second + cell.ending.text;
        break;
      }
      case Ending::Kind::kPart:
        form.wordform = parts[cell.ending.part];
        if (form.wordform.empty() || form.wordform == "-") {
          throw Error(ErrorCode::kExpansion, cls.id + ": principal part " +
                                                 cls.part_names[cell.ending.part] + " is empty");
        }
        break;
      case Ending::Kind::kLiteral:
        form.wordform = cell.ending.text;
        break;
      case Ending::Kind::kGap:
        continue;
    }
    out.push_back(std::move(form));
  }
  return out;
}

AddFormsResult ExpandLemma(Lexicon& lexicon, const EntryId& lemma_id, const ParadigmClass& cls,
                           const std::vector<std::string>& parts, std::string_view author,
                           const ExpansionOptions& options) {
  if (!lexicon.FindLemma(lemma_id)) {
    throw Error(ErrorCode::kNotFound, "no lemma " + lemma_id);
  }
  PosTag pos = lexicon.PosOf(lemma_id);
  if (!cls.AcceptsPos(pos)) {
    throw Error(ErrorCode::kValidation, "class " + cls.id + " does not inflect " +
                                            std::string(PosTagName(pos)) + " entries");
  }
  return lexicon.AddSyntacticWords(lemma_id, GenerateForms(cls, parts, options), author);
}

size_t EstimateExpansionSize(const ParadigmClass& cls, const ExpansionOptions& options) {
  return static_cast<size_t>(std::count_if(cls.cells.begin(), cls.cells.end(),
                                           [&](const ParadigmCell& c) { return Included(c, options); }));
}

SeedReport LoadSeedLexicon(Lexicon& lexicon, const ParadigmRegistry& registry,
                           const std::string& path, std::string_view author,
                           const ExpansionOptions& options) {
  SeedReport report;
  std::vector<std::string> lines = Split(ReadFile(path), '\n');
  for (size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty() || lines[i][0] == '#') continue;
    std::string where = path + ":" + std::to_string(i + 1);
    std::vector<std::string> f = Split(lines[i], '\t');
    if (f.size() != 5) throw Error(ErrorCode::kParse, "expected 5 columns", where);
    try {
      PosTag pos = ParsePosTag(f[1]);
      std::vector<std::string> parts = Split(f[4], ',');
      std::string sl_form = lexicon.Normalize(f[0]);
      std::optional<Superlemma> sl = lexicon.FindSuperlemmaByForm(sl_form, pos);
      if (!sl) {
        sl = lexicon.CreateSuperlemma(sl_form, pos, author);
        ++report.superlemmata;
      }
      ++report.rows;
      if (f[3] == "mwu") {
        bool exists = false;
        for (const MultiWordUnit& m : lexicon.MultiWordUnits()) {
          exists = exists || (m.superlemma_id == sl->id && m.component_forms == parts);
        }
        if (!exists) {
          size_t before = lexicon.LemmaCount();
          lexicon.CreateMultiWordUnit(sl->id, parts, author);
          report.lemmata += lexicon.LemmaCount() - before;
          ++report.syntactic_words;
        }
        continue;
      }
      std::optional<Lemma> lemma;
      for (const Lemma& l : lexicon.LemmataOf(sl->id)) {
        if (l.form == Trim(f[2])) lemma = l;
      }
      if (!lemma) {
        lemma = lexicon.CreateLemma(sl->id, f[2], author);
        ++report.lemmata;
      }
      std::string class_id = f[3];
      if (class_id == "auto") {
        std::vector<std::string> candidates = ClassifyParadigm(pos, parts);
        if (candidates.size() != 1) {
          throw Error(ErrorCode::kClassification,
                      "ambiguous paradigm for " + f[2] + ": " + Join(candidates, ", "));
        }
        class_id = candidates[0];
      }
      AddFormsResult added =
          ExpandLemma(lexicon, lemma->id, registry.Get(class_id), parts, author, options);
      report.syntactic_words += added.created;
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), where);
    }
  }
  return report;
}

}  // namespace latinlex
