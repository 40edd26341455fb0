#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.h"
#include "latinlex/error.h"
#include "latinlex/lexicon.h"
#include "latinlex/lexicon_io.h"
#include "latinlex/morphology.h"

using namespace latinlex;
using namespace latinlex::testing;

namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInternal;
}

// Twelve first-declension forms under a fresh lemma.
Lemma DeclinedLemma(Lexicon& lexicon, const EntryId& superlemma, const std::string& form,
                    const std::string& genitive) {
  Lemma l = lexicon.CreateLemma(superlemma, form, "t");
  ExpandLemma(lexicon, l.id, ParadigmRegistry::Default().Get("noun-decl-1"), {form, genitive}, "t");
  return l;
}

}  // namespace

TEST_CASE("normalization folds v and j and lowercases") {
  Normalizer n;
  CHECK(n.Normalize("Verbum") == "uerbum");
  CHECK(n.Normalize("amare") == "amare");
  CHECK(n.Normalize("Iulius") == n.Normalize("Julius"));
  CHECK(CodeOf([&] { n.Normalize(""); }) == ErrorCode::kValidation);
}

TEST_CASE("normalization is idempotent on random input") {
  Normalizer n;
  std::mt19937_64 rng(7);
  const std::u32string alphabet = U"abcdefghijklmnopqrstuvwxyzJVAEIOUĀēīōū";
  for (int i = 0; i < 500; ++i) {
    std::u32string s;
    for (size_t k = 1 + rng() % 12; k > 0; --k) s += alphabet[rng() % alphabet.size()];
    std::string once = n.Normalize(EncodeUtf8(s));
    CHECK(n.Normalize(once) == once);
  }
}

TEST_CASE("fold tables round-trip and reject chained folds") {
  Normalizer n = Normalizer::Parse("v=u;j=i");
  CHECK(Normalizer::Parse(n.FoldSpec()).FoldSpec() == n.FoldSpec());
  CHECK(CodeOf([] { Normalizer::Parse("v=u;u=w"); }) == ErrorCode::kValidation);
}

TEST_CASE("feature vectors parse in any key order") {
  FeatureVector a = FeatureVector::Parse("number=sg;case=nom");
  CHECK(a.ToString() == "case=nom;number=sg");
  CHECK(FeatureVector().ToString() == "_");
  CHECK(CodeOf([] { FeatureVector::Parse("case=xyz"); }) == ErrorCode::kValidation);
  CHECK(CodeOf([] { FeatureVector::Parse("case=nom;case=gen"); }) == ErrorCode::kValidation);
}

TEST_CASE("superlemma creation") {
  Lexicon lexicon(Normalizer(), SteppingClock());
  size_t before = lexicon.SuperlemmaCount();
  Superlemma s = lexicon.CreateSuperlemma("pater", PosTag::kNN, "t");
  CHECK(lexicon.SuperlemmaCount() == before + 1);
  CHECK(KindOf(s.id) == EntryKind::kSuperlemma);
  CHECK(CodeOf([&] { lexicon.CreateSuperlemma("pater", PosTag::kNN, "t"); }) == ErrorCode::kConflict);
  // Same form, other part of speech is a different superlemma.
  lexicon.CreateSuperlemma("pater", PosTag::kNE, "t");
  Superlemma v = lexicon.CreateSuperlemma("excommunico", PosTag::kV, "t");
  CHECK(lexicon.FindSuperlemma(v.id)->pos == PosTag::kV);
}

TEST_CASE("spelling variants share a superlemma") {
  Lexicon lexicon(Normalizer(), SteppingClock());
  Superlemma s = lexicon.CreateSuperlemma("excommunicatio", PosTag::kNN, "t");
  lexicon.CreateLemma(s.id, "excommunicatio", "t");
  lexicon.CreateLemma(s.id, "excomunicatio", "t");
  CHECK(lexicon.LemmataOf(s.id).size() == 2);
  CHECK(lexicon.SuperlemmaCount() == 1);
  CHECK(CodeOf([&] { lexicon.CreateLemma(s.id, "excomunicatio", "t"); }) == ErrorCode::kConflict);
  CHECK(lexicon.LemmaCount() >= lexicon.SuperlemmaCount());
}

TEST_CASE("lookup is exact on normalized wordforms") {
  auto lexicon = SeededLexicon();
  CHECK(lexicon->LookupWordform("zzz").empty());
  CHECK(lexicon->LookupWordform("domus").empty());
  CHECK_FALSE(lexicon->LookupWordform("domini").empty());

  // gen sg, dat sg, nom pl and voc pl.
  std::set<std::string> features;
  for (const Candidate& c : lexicon->LookupWordform("Rosae")) {
    CHECK(c.lemma.form == "rosa");
    features.insert(c.word.features.ToString());
  }
  CHECK(features == std::set<std::string>{"case=gen;number=sg", "case=dat;number=sg",
                                          "case=nom;number=pl", "case=voc;number=pl"});
}

TEST_CASE("lookup order is stable") {
  auto lexicon = SeededLexicon();
  auto a = lexicon->LookupWordformIds("rosae");
  auto b = lexicon->LookupWordformIds("ROSAE");
  CHECK(a == b);
  CHECK(a.size() == 4);
}

TEST_CASE("merging lemmata deduplicates identical forms") {
  Lexicon lexicon(Normalizer(), SteppingClock());
  Superlemma s = lexicon.CreateSuperlemma("rosa", PosTag::kNN, "t");
  Lemma a = DeclinedLemma(lexicon, s.id, "rosa", "rosae");
  Lemma b = DeclinedLemma(lexicon, s.id, "rossa", "rosae");
  REQUIRE(lexicon.SyntacticWordsOf(b.id).size() == 12);
  // Relabel so the twelve forms coincide.
  for (const SyntacticWord& w : lexicon.SyntacticWordsOf(b.id)) {
    if (w.wordform.rfind("ross", 0) == 0) lexicon.Relabel(w.id, "ros" + w.wordform.substr(4), "t");
  }
  MergeReport r = lexicon.MergeLemmata(a.id, b.id, "t");
  CHECK(r.deduplicated == 12);
  CHECK(r.moved == 0);
  CHECK(lexicon.SyntacticWordsOf(a.id).size() == 12);
  CHECK_FALSE(lexicon.FindLemma(b.id));
  // Twelve words plus the lemma itself.
  CHECK(r.remap.size() == 13);
  CHECK(r.remap.at(b.id) == a.id);
  CHECK(lexicon.CheckIntegrity().empty());
}

TEST_CASE("merging disjoint lemmata keeps every form") {
  Lexicon lexicon(Normalizer(), SteppingClock());
  Superlemma s = lexicon.CreateSuperlemma("rosa", PosTag::kNN, "t");
  Lemma a = DeclinedLemma(lexicon, s.id, "rosa", "rosae");
  Lemma b = DeclinedLemma(lexicon, s.id, "causa", "causae");
  MergeReport r = lexicon.MergeLemmata(a.id, b.id, "t");
  CHECK(r.moved == 12);
  CHECK(r.deduplicated == 0);
  CHECK(lexicon.SyntacticWordsOf(a.id).size() == 24);
  CHECK(CodeOf([&] { lexicon.MergeLemmata(a.id, a.id, "t"); }) == ErrorCode::kValidation);
}

TEST_CASE("deletion") {
  Lexicon lexicon(Normalizer(), SteppingClock());
  Superlemma s = lexicon.CreateSuperlemma("rosa", PosTag::kNN, "t");
  Lemma a = DeclinedLemma(lexicon, s.id, "rosa", "rosae");
  DeclinedLemma(lexicon, s.id, "rossa", "rossae");

  size_t before = lexicon.SyntacticWordCount();
  EntryId leaf = lexicon.SyntacticWordsOf(a.id).front().id;
  CHECK(lexicon.DeleteEntry(leaf, false, "t").total() == 1);
  CHECK(lexicon.SyntacticWordCount() == before - 1);

  CHECK(CodeOf([&] { lexicon.DeleteEntry(s.id, false, "t"); }) == ErrorCode::kConstraint);
  CHECK(lexicon.SuperlemmaCount() == 1);

  // Put the leaf back: 1 + 2 + 24.
  ExpandLemma(lexicon, a.id, ParadigmRegistry::Default().Get("noun-decl-1"), {"rosa", "rosae"}, "t");
  DeleteReport r = lexicon.DeleteEntry(s.id, true, "t");
  CHECK(r.total() == 27);
  CHECK(r.superlemmata == 1);
  CHECK(r.lemmata == 2);
  CHECK(r.syntactic_words == 24);
  CHECK(lexicon.SyntacticWordCount() == 0);
  CHECK(lexicon.LookupWordform("rosam").empty());
}

TEST_CASE("double-check flag") {
  Lexicon lexicon(Normalizer(), SteppingClock());
  Superlemma s = lexicon.CreateSuperlemma("pater", PosTag::kNN, "t");
  Lemma l = lexicon.CreateLemma(s.id, "pater", "t");
  size_t audits = lexicon.AuditCount();
  CHECK(lexicon.MarkDoubleChecked(l.id, "ana").double_checked);
  CHECK(lexicon.MarkDoubleChecked(l.id, "ben").double_checked);
  CHECK(lexicon.AuditCount() == audits + 2);
  auto log = lexicon.AuditLog();
  CHECK(log.back().action == AuditAction::kDoubleCheck);
  CHECK(log.back().author == "ben");
  CHECK(lexicon.DoubleCheckedCount() == 1);
  CHECK(lexicon.FindLemma(l.id)->audit.author == "ben");
}

TEST_CASE("edited lemma fraction") {
  // 18,565 of 133,259 lemmata is 13.93%.
  double pct = std::round(18565.0 * 10000 / 133259) / 100;
  CHECK(pct == doctest::Approx(13.93));

  auto lexicon = SeededLexicon();
  auto lemmata = lexicon->AllLemmata();
  for (size_t i = 0; i < lemmata.size(); i += 4) lexicon->MarkDoubleChecked(lemmata[i].id, "t");
  CHECK(lexicon->DoubleCheckedCount() == (lemmata.size() + 3) / 4);
}

TEST_CASE("failed mutations leave no audit record") {
  Lexicon lexicon(Normalizer(), SteppingClock());
  lexicon.CreateSuperlemma("pater", PosTag::kNN, "t");
  size_t audits = lexicon.AuditCount();
  CHECK_THROWS_AS(lexicon.CreateSuperlemma("pater", PosTag::kNN, "t"), Error);
  CHECK_THROWS_AS(lexicon.CreateLemma("S999", "x", "t"), Error);
  CHECK(lexicon.AuditCount() == audits);
}

TEST_CASE("import reports malformed rows and keeps the rest") {
  std::string h(kLexiconTsvHeader);
  std::string text = h + "\n" +
                     "S1\tpater\tNN\tL1\tpater\t0\tW1\tpater\tcase=nom;number=sg\t0\n"
                     "S1\tpater\tNN\tL1\tpater\t0\tW2\tpatris\tcase=gen;number=sg\t0\n"
                     "S1\tpater\tNN\tL1\tpater\t0\tW3\tpatri\n";
  Lexicon lexicon(Normalizer(), SteppingClock());
  ImportReport r = ImportLexiconText(lexicon, text, ExchangeFormat::kTsv, "t");
  CHECK(r.rows == 3);
  CHECK(r.accepted == 2);
  CHECK(r.syntactic_words == 2);
  REQUIRE(r.rejections.size() == 1);
  CHECK(r.rejections[0].line == 4);
}

TEST_CASE("duplicate superlemma rows conflict") {
  std::string h(kLexiconTsvHeader);
  std::string text = h + "\n" +
                     "S1\tpater\tNN\t\t\t\t\t\t\t\n"
                     "S2\tpater\tNN\t\t\t\t\t\t\t\n";
  Lexicon lexicon(Normalizer(), SteppingClock());
  ImportReport r = ImportLexiconText(lexicon, text, ExchangeFormat::kTsv, "t");
  CHECK(r.accepted == 1);
  REQUIRE(r.rejections.size() == 1);
  CHECK(r.rejections[0].line == 3);
  CHECK(r.rejections[0].reason.find("conflict") != std::string::npos);
}

TEST_CASE("export, import, export gives identical bytes") {
  auto lexicon = SeededLexicon();
  for (ExchangeFormat f : {ExchangeFormat::kTsv, ExchangeFormat::kJsonl}) {
    std::string first = ExportLexiconText(*lexicon, f);
    Lexicon copy(Normalizer(), SteppingClock());
    ImportReport r = ImportLexiconText(copy, first, f, "t");
    CHECK(r.rejections.empty());
    CHECK(ExportLexiconText(copy, f) == first);
  }
}

TEST_CASE("snapshots round-trip") {
  TempDir dir;
  auto lexicon = SeededLexicon();
  lexicon->MarkDoubleChecked(lexicon->AllLemmata().front().id, "t");
  SaveLexiconSnapshot(*lexicon, dir.File("lexicon.json"));
  auto loaded = LoadLexiconSnapshot(dir.File("lexicon.json"), SteppingClock());
  CHECK(ExportLexiconText(*loaded, ExchangeFormat::kTsv) == ExportLexiconText(*lexicon, ExchangeFormat::kTsv));
  CHECK(loaded->AuditLog() == lexicon->AuditLog());
  CHECK(loaded->MultiWordUnits().size() == lexicon->MultiWordUnits().size());
  // Counters continue, ids are never reused.
  Superlemma s = loaded->CreateSuperlemma("nouus", PosTag::kADJ, "t");
  CHECK_FALSE(lexicon->Contains(s.id));
}

TEST_CASE("events carry affected wordforms") {
  Lexicon lexicon(Normalizer(), SteppingClock());
  std::vector<LexiconEvent> seen;
  lexicon.Subscribe([&](const LexiconEvent& e) { seen.push_back(e); });
  Superlemma s = lexicon.CreateSuperlemma("rosa", PosTag::kNN, "t");
  Lemma l = DeclinedLemma(lexicon, s.id, "rosa", "rosae");
  REQUIRE_FALSE(seen.empty());
  CHECK(seen.back().kind == LexiconEventKind::kCreate);
  CHECK(std::count(seen.back().affected_wordforms.begin(), seen.back().affected_wordforms.end(), "rosam") == 1);
  lexicon.DeleteEntry(l.id, true, "t");
  CHECK(seen.back().kind == LexiconEventKind::kDelete);
  CHECK(seen.back().removed.size() == 13);
}
