// latinlex: command line front end over a workspace directory.
//
// Machine-readable results go to stdout, diagnostics to stderr. Exit codes:
// 0 success, 1 domain error, 2 usage error.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <pthread.h>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "latinlex/coverage.h"
#include "latinlex/evaluation.h"
#include "latinlex/lemmatizer.h"
#include "latinlex/lexicon_io.h"
#include "latinlex/morphology.h"
#include "latinlex/service.h"
#include "latinlex/text.h"
#include "latinlex/workspace.h"

namespace {

using namespace latinlex;
using ordered_json = nlohmann::ordered_json;

struct Globals {
  std::string workspace;
  std::string editor;
};

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  for (const std::string& part : Split(s, ',')) {
    std::string_view t = Trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

void Emit(const std::string& json) { std::cout << json << "\n"; }
void Emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

ordered_json ImportReportJson(const ImportReport& r) {
  ordered_json rej = ordered_json::array();
  for (const auto& x : r.rejections) rej.push_back({{"line", x.line}, {"reason", x.reason}});
  return {{"rows", r.rows},
          {"accepted", r.accepted},
          {"superlemmata", r.superlemmata},
          {"lemmata", r.lemmata},
          {"syntactic_words", r.syntactic_words},
          {"rejections", std::move(rej)}};
}

ordered_json LemmatizeJson(const std::vector<LemmatizeResult>& results) {
  ordered_json docs = ordered_json::array();
  std::array<size_t, 9> levels{};
  size_t words = 0, updated = 0, mwu = 0;
  for (const LemmatizeResult& r : results) {
    docs.push_back({{"id", r.doc_id},
                    {"word_tokens", r.word_tokens},
                    {"updated", r.updated},
                    {"multiword_matches", r.multiword_matches},
                    {"levels", r.levels}});
    for (size_t i = 0; i < levels.size(); ++i) levels[i] += r.levels[i];
    words += r.word_tokens;
    updated += r.updated;
    mwu += r.multiword_matches;
  }
  return {{"documents", results.size()},
          {"word_tokens", words},
          {"updated", updated},
          {"multiword_matches", mwu},
          {"levels", levels},
          {"per_document", std::move(docs)}};
}

std::unique_ptr<Workspace> OpenWorkspace(const Globals& g) { return Workspace::Open(g.workspace); }

// Blocks SIGINT/SIGTERM in every thread and stops the service from a
// dedicated waiter thread.
int Serve(Workspace& ws, ServiceConfig config) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  Service service(ws, config);
  int port = service.Bind();
  std::cerr << "latinlex: serving " << ws.dir() << " on http://" << config.host << ":" << port
            << "\n";
  Emit(ordered_json{{"host", config.host}, {"port", port}}.dump());
  std::cout.flush();
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    service.Stop();
  });
  service.Run();
  // Run returned without a signal (e.g. stop from elsewhere): wake the waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  if (config.autosave) ws.Save();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latin lexicon workbench"};
  app.require_subcommand(1);
  Globals g;
  const char* env_ws = std::getenv("LATINLEX_WORKSPACE");
  const char* env_editor = std::getenv("LATINLEX_EDITOR");
  g.workspace = env_ws ? env_ws : ".";
  g.editor = env_editor ? env_editor : "cli";
  app.add_option("-w,--workspace", g.workspace, "workspace directory")->capture_default_str();
  app.add_option("--editor", g.editor, "identity recorded in the audit trail")
      ->capture_default_str();

  std::function<int()> action;
  auto bind = [&](CLI::App* cmd, std::function<int()> fn) {
    cmd->callback([&action, fn] { action = fn; });
  };

  // -- seed / authors ---------------------------------------------------
  auto* seed = app.add_subcommand("seed", "load the shipped seed lexicon");
  bind(seed, [&] {
    auto ws = OpenWorkspace(g);
    ws->SeedLexicon(g.editor);
    ws->Save();
    Emit(ordered_json{{"superlemmata", ws->lexicon().SuperlemmaCount()},
                      {"lemmata", ws->lexicon().LemmaCount()},
                      {"syntactic_words", ws->lexicon().SyntacticWordCount()}});
    return 0;
  });

  auto* authors = app.add_subcommand("authors", "editor allowlist");
  authors->require_subcommand(1);
  auto* authors_add = authors->add_subcommand("add", "allow an identity to edit");
  std::vector<std::string> author_names;
  authors_add->add_option("names", author_names)->required();
  bind(authors_add, [&] {
    auto ws = OpenWorkspace(g);
    for (const auto& a : author_names) ws->AddAuthor(a);
    Emit(ordered_json(ws->Authors()));
    return 0;
  });
  auto* authors_list = authors->add_subcommand("list", "print the allowlist");
  bind(authors_list, [&] {
    Emit(ordered_json(OpenWorkspace(g)->Authors()));
    return 0;
  });

  // -- lexicon ----------------------------------------------------------
  auto* lexicon = app.add_subcommand("lexicon", "lexicon operations");
  lexicon->require_subcommand(1);
  std::string lex_file, lex_format = "tsv";

  auto* lex_import = lexicon->add_subcommand("import", "import TSV or JSONL rows");
  lex_import->add_option("file", lex_file)->required()->check(CLI::ExistingFile);
  lex_import->add_option("--format", lex_format)->check(CLI::IsMember({"tsv", "jsonl"}));
  bind(lex_import, [&] {
    auto ws = OpenWorkspace(g);
    ImportReport r = ImportLexicon(ws->lexicon(), lex_file, ParseExchangeFormat(lex_format), g.editor);
    ws->Save();
    for (const auto& x : r.rejections) {
      std::cerr << lex_file << ":" << x.line << ": rejected: " << x.reason << "\n";
    }
    Emit(ImportReportJson(r));
    return 0;
  });

  auto* lex_export = lexicon->add_subcommand("export", "export the lexicon (- for stdout)");
  lex_export->add_option("file", lex_file)->required();
  lex_export->add_option("--format", lex_format)->check(CLI::IsMember({"tsv", "jsonl"}));
  bind(lex_export, [&] {
    auto ws = OpenWorkspace(g);
    ExchangeFormat format = ParseExchangeFormat(lex_format);
    if (lex_file == "-") {
      std::cout << ExportLexiconText(ws->lexicon(), format);
    } else {
      size_t rows = ExportLexicon(ws->lexicon(), lex_file, format);
      Emit(ordered_json{{"file", lex_file}, {"rows", rows}});
    }
    return 0;
  });

  auto* lex_expand = lexicon->add_subcommand("expand", "generate a lemma's paradigm");
  std::string expand_lemma, expand_class = "auto", expand_parts;
  bool no_vocative = false, no_nominal = false;
  lex_expand->add_option("--lemma", expand_lemma, "lemma id")->required();
  lex_expand->add_option("--class", expand_class, "paradigm class or auto")->capture_default_str();
  lex_expand->add_option("--parts", expand_parts, "comma-separated principal parts")->required();
  lex_expand->add_flag("--no-vocative", no_vocative);
  lex_expand->add_flag("--no-nominal-forms", no_nominal);
  bind(lex_expand, [&] {
    auto ws = OpenWorkspace(g);
    std::vector<std::string> parts = SplitList(expand_parts);
    std::string cls = expand_class;
    if (cls == "auto") {
      auto found = ClassifyParadigm(ws->lexicon().PosOf(expand_lemma), parts);
      if (found.size() != 1) {
        throw Error(ErrorCode::kClassification,
                    "ambiguous paradigm class: " + Join(found, ", ") + "; pass --class");
      }
      cls = found.front();
    }
    ExpansionOptions options;
    options.vocative = !no_vocative;
    options.nominal_subparadigms = !no_nominal;
    AddFormsResult r = ExpandLemma(ws->lexicon(), expand_lemma, ParadigmRegistry::Default().Get(cls),
                                   parts, g.editor, options);
    ws->Save();
    Emit(ordered_json{{"lemma_id", expand_lemma},
                      {"class", cls},
                      {"forms", r.words.size()},
                      {"created", r.created}});
    return 0;
  });

  auto* lex_merge = lexicon->add_subcommand("merge", "merge two lemmata");
  std::string survivor, absorbed;
  lex_merge->add_option("survivor", survivor)->required();
  lex_merge->add_option("absorbed", absorbed)->required();
  bind(lex_merge, [&] {
    auto ws = OpenWorkspace(g);
    MergeReport r = ws->lexicon().MergeLemmata(survivor, absorbed, g.editor);
    ws->Save();
    Emit(MergeReportJson(r));
    return 0;
  });

  auto* lex_search = lexicon->add_subcommand("search", "candidates for a wordform");
  std::string search_form;
  lex_search->add_option("form", search_form)->required();
  bind(lex_search, [&] {
    auto ws = OpenWorkspace(g);
    Emit(CandidatesJson(search_form, ws->lexicon().LookupWordform(search_form)));
    return 0;
  });

  // -- corpus -----------------------------------------------------------
  auto* corpus = app.add_subcommand("corpus", "corpus operations");
  corpus->require_subcommand(1);
  std::string layer_id = "reference";

  auto* ingest = corpus->add_subcommand("ingest", "add documents");
  std::vector<std::string> ingest_files;
  std::string ingest_format = "plain", ingest_title, meta_file;
  DocumentMetadata meta;
  int date_from = 0, date_to = 0;
  ingest->add_option("files", ingest_files)->required()->check(CLI::ExistingFile);
  ingest->add_option("--format", ingest_format)->check(CLI::IsMember({"plain", "txt", "tei", "xml"}));
  ingest->add_option("--genre", meta.genre);
  ingest->add_option("--author", meta.author, "document author (metadata)");
  auto* opt_from = ingest->add_option("--date-from", date_from);
  auto* opt_to = ingest->add_option("--date-to", date_to);
  ingest->add_option("--title", ingest_title, "title (single file only)");
  ingest->add_option("--metadata", meta_file, "sidecar JSON with the metadata")
      ->check(CLI::ExistingFile);
  bind(ingest, [&] {
    auto ws = OpenWorkspace(g);
    DocumentMetadata m = meta_file.empty() ? meta : DocumentMetadata::FromJson(ReadFile(meta_file));
    if (*opt_from) m.date_from = date_from;
    if (*opt_to) m.date_to = date_to;
    if (!ingest_title.empty() && ingest_files.size() > 1) {
      throw Error(ErrorCode::kValidation, "--title needs a single file");
    }
    ordered_json out = ordered_json::array();
    for (const std::string& file : ingest_files) {
      std::string title = ingest_title.empty() ? std::filesystem::path(file).stem().string() : ingest_title;
      Document d = ws->corpus().Ingest(ReadFile(file), ParseSourceFormat(ingest_format), m, title);
      size_t words = 0;
      for (const Token& t : d.tokens) words += t.is_word;
      out.push_back({{"id", d.id}, {"title", d.title}, {"tokens", d.tokens.size()}, {"word_tokens", words}});
    }
    ws->Save();
    Emit(out);
    return 0;
  });

  auto* lemmatize = corpus->add_subcommand("lemmatize", "automatic lemmatization");
  bool bootstrap = false;
  unsigned lem_threads = 0;
  double margin = 2.0;
  lemmatize->add_option("--layer", layer_id)->capture_default_str();
  lemmatize->add_flag("--bootstrap", bootstrap,
                      "two passes over the whole corpus, storing corpus frequencies in between");
  lemmatize->add_option("--threads", lem_threads, "0: hardware concurrency");
  lemmatize->add_option("--margin", margin)->capture_default_str();
  bind(lemmatize, [&] {
    auto ws = OpenWorkspace(g);
    std::vector<LemmatizeResult> results;
    if (bootstrap) {
      results = LemmatizeWithBootstrap(ws->lexicon(), ws->corpus(), g.editor, lem_threads);
    } else {
      LemmatizeOptions options;
      options.margin = margin;
      results = LemmatizeLayer(ws->corpus(), ws->lexicon(), CorpusLayer::Parse(layer_id), options,
                               lem_threads);
    }
    ws->Save();
    Emit(LemmatizeJson(results));
    return 0;
  });

  auto* stats = corpus->add_subcommand("stats", "coverage report");
  bool stats_text = false;
  stats->add_option("--layer", layer_id)->capture_default_str();
  stats->add_flag("--text", stats_text, "human-readable table");
  bind(stats, [&] {
    auto ws = OpenWorkspace(g);
    CoverageReport r = ComputeCoverage(ws->corpus(), ws->lexicon(), CorpusLayer::Parse(layer_id));
    std::cout << (stats_text ? r.ToText() : r.ToJson()) << "\n";
    return 0;
  });

  auto* curve = corpus->add_subcommand("curve", "syntactic words needed per coverage level");
  std::string grid;
  curve->add_option("--layer", layer_id)->capture_default_str();
  curve->add_option("--grid", grid, "comma-separated percentages (default 1..100)");
  bind(curve, [&] {
    auto ws = OpenWorkspace(g);
    std::vector<double> points;
    if (grid.empty()) {
      points = DefaultPercentGrid();
    } else {
      for (const std::string& p : SplitList(grid)) {
        try {
          points.push_back(std::stod(p));
        } catch (const std::exception&) {
          throw Error(ErrorCode::kValidation, "grid values must be numbers");
        }
      }
    }
    CorpusLayer layer = CorpusLayer::Parse(layer_id);
    Emit(CurveToJson(layer.id, CoverageCurve(ws->corpus(), ws->lexicon(), layer, points)));
    return 0;
  });

  auto* evaluate = corpus->add_subcommand("evaluate", "lemmatization F1 against a gold file");
  std::string eval_doc, gold_file, overrides_file;
  bool eval_text = false;
  evaluate->add_option("--document", eval_doc)->required();
  evaluate->add_option("--gold", gold_file, "TSV: surface lemma [pos]")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--overrides", overrides_file, "TSV: form predicted replacement")
      ->check(CLI::ExistingFile);
  evaluate->add_flag("--text", eval_text);
  bind(evaluate, [&] {
    auto ws = OpenWorkspace(g);
    std::vector<LemmaToken> pred = DocumentPredictions(ws->corpus(), ws->lexicon(), eval_doc);
    std::vector<LemmaToken> gold = ReadLemmaTsv(gold_file);
    EvaluationReport before = Evaluate(pred, gold);
    if (overrides_file.empty()) {
      std::cout << (eval_text ? before.ToText() : before.ToJson()) << "\n";
      return 0;
    }
    std::vector<OverrideRule> table = ReadOverrideTable(overrides_file);
    EvaluationReport after = Evaluate(ApplyOverrideTable(pred, table), gold);
    if (eval_text) {
      std::cout << "before overrides\n" << before.ToText() << "\nafter overrides\n" << after.ToText() << "\n";
      return 0;
    }
    ordered_json rules = ordered_json::array();
    for (const auto& r : table) {
      rules.push_back({{"form", r.form}, {"predicted", r.predicted}, {"replacement", r.replacement},
                       {"hits", r.hit_count}});
    }
    Emit(ordered_json{{"before", ordered_json::parse(before.ToJson())},
                      {"after", ordered_json::parse(after.ToJson())},
                      {"f1_delta", after.f1 - before.f1},
                      {"overrides", std::move(rules)}});
    return 0;
  });

  auto* link = corpus->add_subcommand("link", "editor action on one token");
  std::string link_doc, link_id, link_action = "confirm";
  size_t link_token = 0;
  link->add_option("document", link_doc)->required();
  link->add_option("token", link_token)->required();
  link->add_option("syntactic_word", link_id)->required();
  link->add_option("--action", link_action)
      ->check(CLI::IsMember({"confirm", "correct", "create", "double_check", "double-check"}));
  bind(link, [&] {
    auto ws = OpenWorkspace(g);
    TokenLink l = ws->corpus().LinkToken(link_doc, link_token, link_id, g.editor,
                                         ParseLinkAction(link_action));
    ws->Save();
    Emit(TokenLinkJson(l));
    return 0;
  });

  auto* tokens = corpus->add_subcommand("tokens", "tokens of a document with their links");
  std::string tokens_doc;
  size_t tokens_offset = 0, tokens_limit = 200;
  tokens->add_option("document", tokens_doc)->required();
  tokens->add_option("--offset", tokens_offset);
  tokens->add_option("--limit", tokens_limit)->capture_default_str();
  bind(tokens, [&] {
    auto ws = OpenWorkspace(g);
    Emit(DocumentTokensJson(ws->corpus().GetDocument(tokens_doc), tokens_offset, tokens_limit));
    return 0;
  });

  auto* docs = corpus->add_subcommand("list", "documents");
  bind(docs, [&] {
    auto ws = OpenWorkspace(g);
    auto list = ws->corpus().ListDocuments();
    Emit(DocumentListJson(list, 0, list.size()));
    return 0;
  });

  // -- embed ------------------------------------------------------------
  auto* embed = app.add_subcommand("embed", "embedding spaces");
  embed->require_subcommand(1);
  auto* train = embed->add_subcommand("train", "train spaces for layers x methods x resolutions");
  std::string train_layers = "reference", train_methods = "cbow,skipgram",
              train_resolutions = "wordform,lemma";
  TrainingConfig base;
  bool force = false;
  train->add_option("--layers", train_layers)->capture_default_str();
  train->add_option("--methods", train_methods, "cbow, skipgram, cbow-subword, skipgram-subword")
      ->capture_default_str();
  train->add_option("--resolutions", train_resolutions,
                    "wordform, syntactic_word, lemma, superlemma")
      ->capture_default_str();
  train->add_option("--dim", base.dim)->capture_default_str();
  train->add_option("--window", base.window)->capture_default_str();
  train->add_option("--negative", base.negative)->capture_default_str();
  train->add_option("--epochs", base.epochs)->capture_default_str();
  train->add_option("--min-count", base.min_count)->capture_default_str();
  train->add_option("--subsample", base.subsample_t)->capture_default_str();
  train->add_option("--lr", base.initial_lr)->capture_default_str();
  train->add_option("--seed", base.seed)->capture_default_str();
  train->add_option("--threads", base.threads)->capture_default_str();
  train->add_flag("--force", force, "retrain spaces already in the manifest");
  bind(train, [&] {
    auto ws = OpenWorkspace(g);
    TrainPlan plan;
    plan.layers = SplitList(train_layers);
    plan.methods = SplitList(train_methods);
    for (const std::string& r : SplitList(train_resolutions)) plan.resolutions.push_back(ParseResolution(r));
    plan.base = base;
    plan.force = force;
    for (const std::string& m : plan.methods) ConfigForMethod(m, base).Validate();
    auto outcomes = TrainSpaces(*ws, plan, [](const TrainOutcome& o) {
      std::cerr << "latinlex: " << o.key.ToString() << ": "
                << (o.skipped ? "skipped (already trained)"
                    : o.error.empty() ? std::to_string(o.vocabulary) + " symbols"
                                      : "failed: " + o.error)
                << "\n";
    });
    ordered_json out = ordered_json::array();
    size_t failed = 0;
    for (const TrainOutcome& o : outcomes) {
      ordered_json j{{"key", o.key.ToString()}, {"skipped", o.skipped}, {"vocabulary", o.vocabulary}};
      if (!o.error.empty()) {
        j["error"] = o.error;
        ++failed;
      }
      out.push_back(std::move(j));
    }
    Emit(out);
    if (failed) {
      std::cerr << "latinlex: training error: " << failed << " of " << outcomes.size()
                << " spaces could not be trained\n";
      return 1;
    }
    return 0;
  });

  std::string sp_layer, sp_method, sp_resolution, seed_symbol;
  auto add_space_options = [&](CLI::App* cmd) {
    cmd->add_option("--layer", sp_layer, "layer id, or a whole space such as legal-cbow-lemma");
    cmd->add_option("--method", sp_method);
    cmd->add_option("--resolution", sp_resolution);
    cmd->add_option("--seed", seed_symbol, "seed word or symbol")->required();
  };

  auto* nn = embed->add_subcommand("nn", "nearest neighbors");
  size_t nn_k = 10;
  add_space_options(nn);
  nn->add_option("-k,--k", nn_k)->capture_default_str();
  bind(nn, [&] {
    auto ws = OpenWorkspace(g);
    SpaceKey key = SelectSpace(*ws, sp_layer, sp_method, sp_resolution);
    auto space = ws->Space(key);
    std::string symbol = ResolveSeed(ws->lexicon(), *space, seed_symbol);
    Emit(NeighborsJson(key, symbol, space->NearestNeighbors(symbol, nn_k), ws->lexicon()));
    return 0;
  });

  // -- graph ------------------------------------------------------------
  auto* graph = app.add_subcommand("graph", "local graph views");
  graph->require_subcommand(1);
  auto* view = graph->add_subcommand("view", "seed-centered graph view as JSON");
  size_t m = 100;
  double threshold = 0;
  bool star = false;
  std::string view_out;
  add_space_options(view);
  view->add_option("--m", m, "neighbors")->capture_default_str();
  view->add_option("--threshold", threshold, "minimum edge weight")->capture_default_str();
  view->add_flag("--star", star, "only seed-to-neighbor edges");
  view->add_option("-o,--output", view_out, "write to a file instead of stdout");
  bind(view, [&] {
    auto ws = OpenWorkspace(g);
    SpaceKey key = SelectSpace(*ws, sp_layer, sp_method, sp_resolution);
    GraphView v = BuildWorkspaceGraph(*ws, key, seed_symbol, m, threshold, star);
    if (view_out.empty()) {
      Emit(GraphViewToJson(v));
    } else {
      ExportGraphView(v, view_out);
      Emit(ordered_json{{"file", view_out}, {"nodes", v.nodes.size()}, {"edges", v.edges.size()}}.dump());
    }
    return 0;
  });

  auto* overlap = graph->add_subcommand("overlap", "neighbor overlap between two spaces");
  std::string space_a, space_b, overlap_symbol;
  size_t overlap_k = 10;
  overlap->add_option("--symbol", overlap_symbol)->required();
  overlap->add_option("--a", space_a, "space key, e.g. legal/cbow/lemma")->required();
  overlap->add_option("--b", space_b)->required();
  overlap->add_option("-k,--k", overlap_k)->capture_default_str();
  bind(overlap, [&] {
    auto ws = OpenWorkspace(g);
    auto a = ws->Space(SelectSpace(*ws, space_a, "", ""));
    auto b = ws->Space(SelectSpace(*ws, space_b, "", ""));
    std::string symbol = ResolveSeed(ws->lexicon(), *a, overlap_symbol);
    Emit(LayerOverlapJson(ComputeLayerOverlap(symbol, *a, *b, overlap_k)));
    return 0;
  });

  // -- serve ------------------------------------------------------------
  auto* serve = app.add_subcommand("serve", "HTTP JSON API");
  ServiceConfig config;
  bool no_autosave = false;
  serve->add_option("--host", config.host)->capture_default_str();
  serve->add_option("--port", config.port, "0 picks a free port")->capture_default_str();
  serve->add_option("--threads", config.threads)->capture_default_str();
  serve->add_option("--page-size", config.page_size)->capture_default_str();
  serve->add_flag("--no-autosave", no_autosave);
  bind(serve, [&] {
    auto ws = OpenWorkspace(g);
    config.autosave = !no_autosave;
    return Serve(*ws, config);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return action ? action() : 2;
  } catch (const Error& e) {
    std::cerr << "latinlex: " << ApiErrorCode(e.code()) << ": " << e.what();
    if (!e.location().empty()) std::cerr << " (" << e.location() << ")";
    std::cerr << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "latinlex: internal error: " << e.what() << "\n";
    return 1;
  }
}
