#include "latinlex/lexicon_io.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "latinlex/error.h"

namespace latinlex {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr size_t kTsvColumns = 10;

// A parsed exchange row, or the reason it could not be parsed.
struct ParsedRow {
  size_t line = 0;
  std::optional<EntryRecord> record;
  std::string error;
};

uint64_t ParseCount(const std::string& text, std::string_view what) {
  uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::kParse, std::string(what) + " '" + text + "' is not a count");
  }
  return value;
}

EntryRecord RecordFromFields(const std::vector<std::string>& f) {
  EntryRecord r;
  if (f[0].empty() || f[1].empty() || f[2].empty()) {
    throw Error(ErrorCode::kParse, "superlemma columns are required");
  }
  Superlemma s;
  s.id = f[0];
  s.form = f[1];
  s.pos = ParsePosTag(f[2]);
  r.superlemma = s;

  bool has_lemma = !f[3].empty() || !f[4].empty() || !f[5].empty();
  bool has_word = !f[6].empty() || !f[7].empty() || !f[8].empty() || !f[9].empty();
  if (has_lemma) {
    if (f[3].empty() || f[4].empty()) throw Error(ErrorCode::kParse, "incomplete lemma columns");
    Lemma l;
    l.id = f[3];
    l.superlemma_id = s.id;
    l.form = f[4];
    if (f[5] == "1") {
      l.double_checked = true;
    } else if (f[5] == "0" || f[5].empty()) {
      l.double_checked = false;
    } else {
      throw Error(ErrorCode::kParse, "double_checked must be 0 or 1");
    }
    r.lemma = l;
  }
  if (has_word) {
    if (!has_lemma) throw Error(ErrorCode::kParse, "syntactic word columns without a lemma");
    if (f[6].empty() || f[7].empty()) {
      throw Error(ErrorCode::kParse, "incomplete syntactic word columns");
    }
    SyntacticWord w;
    w.id = f[6];
    w.lemma_id = f[3];
    w.wordform = f[7];
    w.features = FeatureVector::Parse(f[8]);
    w.corpus_frequency = f[9].empty() ? 0 : ParseCount(f[9], "frequency");
    r.word = w;
  }
  return r;
}

std::vector<ParsedRow> ParseTsv(std::string_view content) {
  std::vector<ParsedRow> rows;
  std::vector<std::string> lines = Split(content, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (i == 0 && line == kLexiconTsvHeader) continue;
    if (line.empty()) continue;
    ParsedRow row;
    row.line = i + 1;
    try {
      std::vector<std::string> fields = Split(line, '\t');
      if (fields.size() != kTsvColumns) {
        throw Error(ErrorCode::kParse, "expected " + std::to_string(kTsvColumns) +
                                           " columns, got " + std::to_string(fields.size()));
      }
      row.record = RecordFromFields(fields);
    } catch (const Error& e) {
      row.error = std::string(ErrorCodeName(e.code())) + ": " + e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string JsonString(const ordered_json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::kParse, std::string("missing string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

std::vector<ParsedRow> ParseJsonl(std::string_view content) {
  std::vector<ParsedRow> rows;
  std::vector<std::string> lines = Split(content, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    ParsedRow row;
    row.line = i + 1;
    try {
      ordered_json j;
      try {
        j = ordered_json::parse(lines[i]);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kParse, e.what());
      }
      if (!j.is_object() || !j.contains("superlemma") || !j["superlemma"].is_object()) {
        throw Error(ErrorCode::kParse, "row needs a superlemma object");
      }
      std::vector<std::string> f(kTsvColumns);
      const auto& s = j["superlemma"];
      f[0] = JsonString(s, "id");
      f[1] = JsonString(s, "form");
      f[2] = JsonString(s, "pos");
      if (j.contains("lemma") && !j["lemma"].is_null()) {
        const auto& l = j["lemma"];
        f[3] = JsonString(l, "id");
        f[4] = JsonString(l, "form");
        f[5] = l.value("double_checked", false) ? "1" : "0";
      }
      if (j.contains("syntactic_word") && !j["syntactic_word"].is_null()) {
        const auto& w = j["syntactic_word"];
        f[6] = JsonString(w, "id");
        f[7] = JsonString(w, "wordform");
        f[8] = w.value("features", std::string("_"));
        if (w.contains("frequency")) {
          if (!w["frequency"].is_number_unsigned()) {
            throw Error(ErrorCode::kParse, "frequency must be a non-negative integer");
          }
          f[9] = std::to_string(w["frequency"].get<uint64_t>());
        } else {
          f[9] = "0";
        }
      }
      row.record = RecordFromFields(f);
    } catch (const Error& e) {
      row.error = std::string(ErrorCodeName(e.code())) + ": " + e.what();
    } catch (const nlohmann::json::exception& e) {
      row.error = std::string("parse: ") + e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json RecordToJson(const EntryRecord& r) {
  ordered_json j;
  j["superlemma"] = {{"id", r.superlemma->id},
                     {"form", r.superlemma->form},
                     {"pos", std::string(PosTagName(r.superlemma->pos))}};
  if (r.lemma) {
    j["lemma"] = {{"id", r.lemma->id},
                  {"form", r.lemma->form},
                  {"double_checked", r.lemma->double_checked}};
  } else {
    j["lemma"] = nullptr;
  }
  if (r.word) {
    j["syntactic_word"] = {{"id", r.word->id},
                           {"wordform", r.word->wordform},
                           {"features", r.word->features.ToString()},
                           {"frequency", r.word->corpus_frequency}};
  } else {
    j["syntactic_word"] = nullptr;
  }
  return j;
}

ordered_json AuditToJson(const AuditRecord& a) {
  return {{"seq", a.seq},
          {"author", a.author},
          {"timestamp", FormatTimestamp(a.timestamp)},
          {"action", std::string(AuditActionName(a.action))},
          {"target", a.target},
          {"detail", a.detail}};
}

AuditRecord AuditFromJson(const ordered_json& j) {
  AuditRecord a;
  a.seq = j.at("seq").get<uint64_t>();
  a.author = j.at("author").get<std::string>();
  a.timestamp = ParseTimestamp(j.at("timestamp").get<std::string>());
  a.action = ParseAuditAction(j.at("action").get<std::string>());
  a.target = j.at("target").get<std::string>();
  a.detail = j.value("detail", std::string());
  return a;
}

}  // namespace

ExchangeFormat ParseExchangeFormat(std::string_view name) {
  if (name == "tsv") return ExchangeFormat::kTsv;
  if (name == "jsonl") return ExchangeFormat::kJsonl;
  throw Error(ErrorCode::kValidation, "unknown lexicon format '" + std::string(name) + "'");
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "write to " + path + " failed");
}

ImportReport ImportLexiconText(Lexicon& lexicon, std::string_view content, ExchangeFormat format,
                               std::string_view author, std::string_view source) {
  std::vector<ParsedRow> rows =
      format == ExchangeFormat::kTsv ? ParseTsv(content) : ParseJsonl(content);
  ImportReport report;
  report.rows = rows.size();

  std::vector<EntryRecord> records;
  std::vector<size_t> record_lines;
  for (const ParsedRow& row : rows) {
    if (row.record) {
      records.push_back(*row.record);
      record_lines.push_back(row.line);
    } else {
      report.rejections.push_back({row.line, row.error});
    }
  }
  size_t s0 = lexicon.SuperlemmaCount(), l0 = lexicon.LemmaCount(),
         w0 = lexicon.SyntacticWordCount();
  auto failures = lexicon.InsertRecords(records, author, source);
  for (const auto& [index, reason] : failures) {
    report.rejections.push_back({record_lines[index], reason});
  }
  std::sort(report.rejections.begin(), report.rejections.end(),
            [](const ImportRejection& a, const ImportRejection& b) { return a.line < b.line; });
  report.accepted = records.size() - failures.size();
  report.superlemmata = lexicon.SuperlemmaCount() - s0;
  report.lemmata = lexicon.LemmaCount() - l0;
  report.syntactic_words = lexicon.SyntacticWordCount() - w0;
  return report;
}

ImportReport ImportLexicon(Lexicon& lexicon, const std::string& path, ExchangeFormat format,
                           std::string_view author) {
  return ImportLexiconText(lexicon, ReadFile(path), format, author, path);
}

std::string ExportLexiconText(const Lexicon& lexicon, ExchangeFormat format, size_t* rows) {
  std::vector<EntryRecord> records = lexicon.ExportRecords();
  std::string out;
  if (format == ExchangeFormat::kTsv) {
    out += kLexiconTsvHeader;
    out += '\n';
    for (const EntryRecord& r : records) {
      const Superlemma& s = *r.superlemma;
      out += s.id + '\t' + s.form + '\t' + std::string(PosTagName(s.pos)) + '\t';
      if (r.lemma) {
        out += r.lemma->id + '\t' + r.lemma->form + '\t' + (r.lemma->double_checked ? "1" : "0");
      } else {
        out += "\t\t";
      }
      out += '\t';
      if (r.word) {
        out += r.word->id + '\t' + r.word->wordform + '\t' + r.word->features.ToString() + '\t' +
               std::to_string(r.word->corpus_frequency);
      } else {
        out += "\t\t\t";
      }
      out += '\n';
    }
  } else {
    for (const EntryRecord& r : records) {
      out += RecordToJson(r).dump();
      out += '\n';
    }
  }
  if (rows) *rows = records.size();
  return out;
}

size_t ExportLexicon(const Lexicon& lexicon, const std::string& path, ExchangeFormat format) {
  size_t rows = 0;
  WriteFile(path, ExportLexiconText(lexicon, format, &rows));
  return rows;
}

void SaveLexiconSnapshot(const Lexicon& lexicon, const std::string& path) {
  ordered_json j;
  j["format"] = "latinlex-lexicon";
  j["version"] = 1;
  j["folds"] = lexicon.normalizer().FoldSpec();
  Lexicon::Counters c = lexicon.counters();
  j["counters"] = {{"superlemma", c.next_superlemma}, {"lemma", c.next_lemma},
                   {"word", c.next_word},             {"audit", c.next_audit},
                   {"event", c.next_event}};
  ordered_json entries = ordered_json::array();
  for (const EntryRecord& r : lexicon.ExportRecords()) {
    ordered_json e = RecordToJson(r);
    e["superlemma"]["audit"] = r.superlemma->audit.seq;
    if (r.lemma) e["lemma"]["audit"] = r.lemma->audit.seq;
    if (r.word) e["syntactic_word"]["audit"] = r.word->audit.seq;
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  ordered_json mwus = ordered_json::array();
  for (const MultiWordUnit& m : lexicon.MultiWordUnits()) {
    mwus.push_back({{"superlemma_id", m.superlemma_id},
                    {"sw_id", m.syntactic_word_id},
                    {"components", m.component_forms}});
  }
  j["multiword_units"] = std::move(mwus);
  ordered_json audit = ordered_json::array();
  for (const AuditRecord& a : lexicon.AuditLog()) audit.push_back(AuditToJson(a));
  j["audit"] = std::move(audit);
  WriteFile(path, j.dump(1) + "\n");
}

std::unique_ptr<Lexicon> LoadLexiconSnapshot(const std::string& path, Clock clock) {
  ordered_json j;
  try {
    j = ordered_json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("lexicon snapshot: ") + e.what(), path);
  }
  try {
    if (j.value("format", std::string()) != "latinlex-lexicon") {
      throw Error(ErrorCode::kParse, "not a lexicon snapshot", path);
    }
    auto lexicon = std::make_unique<Lexicon>(Normalizer::Parse(j.value("folds", std::string())),
                                             std::move(clock));
    std::vector<AuditRecord> audit;
    std::map<uint64_t, AuditRecord> audit_by_seq;
    for (const auto& a : j.at("audit")) {
      audit.push_back(AuditFromJson(a));
      audit_by_seq[audit.back().seq] = audit.back();
    }
    auto audit_of = [&](const ordered_json& obj) {
      auto it = audit_by_seq.find(obj.value("audit", uint64_t{0}));
      return it == audit_by_seq.end() ? AuditRecord{} : it->second;
    };
    std::vector<EntryRecord> records;
    for (const auto& e : j.at("entries")) {
      EntryRecord r;
      const auto& s = e.at("superlemma");
      r.superlemma = Superlemma{s.at("id").get<std::string>(), s.at("form").get<std::string>(),
                                ParsePosTag(s.at("pos").get<std::string>()), audit_of(s)};
      if (!e.at("lemma").is_null()) {
        const auto& l = e.at("lemma");
        r.lemma = Lemma{l.at("id").get<std::string>(), r.superlemma->id,
                        l.at("form").get<std::string>(), l.at("double_checked").get<bool>(),
                        audit_of(l)};
      }
      if (!e.at("syntactic_word").is_null()) {
        const auto& w = e.at("syntactic_word");
        r.word = SyntacticWord{w.at("id").get<std::string>(), r.lemma->id,
                               w.at("wordform").get<std::string>(),
                               FeatureVector::Parse(w.at("features").get<std::string>()),
                               w.at("frequency").get<uint64_t>(), audit_of(w)};
      }
      records.push_back(std::move(r));
    }
    std::vector<MultiWordUnit> mwus;
    for (const auto& m : j.at("multiword_units")) {
      mwus.push_back(MultiWordUnit{m.at("superlemma_id").get<std::string>(),
                                   m.at("sw_id").get<std::string>(),
                                   m.at("components").get<std::vector<std::string>>()});
    }
    const auto& c = j.at("counters");
    Lexicon::Counters counters{c.at("superlemma").get<uint64_t>(), c.at("lemma").get<uint64_t>(),
                               c.at("word").get<uint64_t>(), c.at("audit").get<uint64_t>(),
                               c.at("event").get<uint64_t>()};
    lexicon->Restore(records, mwus, audit, counters);
    return lexicon;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("lexicon snapshot: ") + e.what(), path);
  }
}

}  // namespace latinlex
