#include "latinlex/service.h"

#include <charconv>
#include <cmath>
#include <map>

#include "httplib.h"
#include "json.hpp"
#include "latinlex/coverage.h"
#include "latinlex/morphology.h"
#include "latinlex/text.h"

namespace latinlex {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json AuditJson(const AuditRecord& a) {
  return {{"seq", a.seq},
          {"author", a.author},
          {"timestamp", FormatTimestamp(a.timestamp)},
          {"action", AuditActionName(a.action)}};
}

ordered_json SuperlemmaJson(const Superlemma& s) {
  return {{"id", s.id}, {"form", s.form}, {"pos", PosTagName(s.pos)}, {"audit", AuditJson(s.audit)}};
}

ordered_json LemmaJson(const Lemma& l) {
  return {{"id", l.id},
          {"superlemma_id", l.superlemma_id},
          {"form", l.form},
          {"double_checked", l.double_checked},
          {"audit", AuditJson(l.audit)}};
}

ordered_json WordJson(const SyntacticWord& w) {
  return {{"id", w.id},
          {"lemma_id", w.lemma_id},
          {"wordform", w.wordform},
          {"features", w.features.ToString()},
          {"corpus_frequency", w.corpus_frequency}};
}

ordered_json LinkJson(const TokenLink& l) {
  ordered_json j;
  j["candidates"] = l.candidates;
  j["chosen"] = l.chosen ? ordered_json(*l.chosen) : ordered_json(nullptr);
  j["level"] = LevelValue(l.level);
  j["level_name"] = AnnotationLevelName(l.level);
  j["editor"] = l.editor.empty() ? ordered_json(nullptr) : ordered_json(l.editor);
  j["timestamp"] = l.timestamp ? ordered_json(FormatTimestamp(*l.timestamp)) : ordered_json(nullptr);
  j["mwu"] = l.mwu == MwuRole::kNone ? "none" : l.mwu == MwuRole::kHead ? "head" : "continuation";
  return j;
}

ordered_json MetadataObject(const DocumentMetadata& m) { return ordered_json::parse(m.ToJson()); }

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status(status), code(std::move(code)) {}
  int status;
  std::string code;
};

ordered_json ParseBody(const httplib::Request& req) {
  if (req.body.empty()) throw Error(ErrorCode::kValidation, "request body must be a JSON object");
  try {
    ordered_json j = ordered_json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::kValidation, "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kValidation, std::string("malformed JSON: ") + e.what());
  }
}

std::string RequireString(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw Error(ErrorCode::kValidation, std::string("field '") + key + "' is required");
  }
  return it->get<std::string>();
}

size_t QueryCount(const httplib::Request& req, const char* key, size_t fallback) {
  if (!req.has_param(key)) return fallback;
  std::string v = req.get_param_value(key);
  size_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::kValidation, std::string("parameter '") + key + "' must be a count");
  }
  return out;
}

double QueryDouble(const httplib::Request& req, const char* key, double fallback) {
  if (!req.has_param(key)) return fallback;
  std::string v = req.get_param_value(key);
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size() || std::isnan(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kValidation, std::string("parameter '") + key + "' must be a number");
  }
}

std::string Query(const httplib::Request& req, const char* key) {
  return req.has_param(key) ? req.get_param_value(key) : std::string();
}

std::vector<double> ParseGrid(std::string_view text) {
  std::vector<double> grid;
  for (const std::string& part : Split(text, ',')) {
    std::string_view t = Trim(part);
    if (t.empty()) continue;
    try {
      grid.push_back(std::stod(std::string(t)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kValidation, "grid values must be numbers");
    }
  }
  return grid;
}

}  // namespace

std::string_view ApiErrorCode(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kStaleView: return "stale_view";
    case ErrorCode::kValidation:
    case ErrorCode::kConstraint:
    case ErrorCode::kParse:
    case ErrorCode::kExpansion:
    case ErrorCode::kClassification:
      return "validation";
    default:
      return "internal";
  }
}

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kStaleView: return 409;
    case ErrorCode::kValidation:
    case ErrorCode::kConstraint:
    case ErrorCode::kParse:
    case ErrorCode::kExpansion:
    case ErrorCode::kClassification:
      return 400;
    default: return 500;
  }
}

std::string ApiErrorJson(std::string_view code, std::string_view message,
                         std::string_view location) {
  ordered_json e;
  e["code"] = code;
  e["message"] = message;
  if (!location.empty()) e["location"] = location;
  return ordered_json{{"error", e}}.dump();
}

std::string CandidatesJson(std::string_view query, const std::vector<Candidate>& candidates) {
  ordered_json j;
  j["query"] = query;
  auto arr = ordered_json::array();
  for (const Candidate& c : candidates) {
    ordered_json jc = WordJson(c.word);
    jc["lemma"] = c.lemma.form;
    jc["superlemma_id"] = c.superlemma.id;
    jc["superlemma"] = c.superlemma.form;
    jc["pos"] = PosTagName(c.superlemma.pos);
    arr.push_back(std::move(jc));
  }
  j["candidates"] = std::move(arr);
  return j.dump();
}

std::string TokenLinkJson(const TokenLink& link) { return LinkJson(link).dump(); }

std::string DocumentTokensJson(const Document& doc, size_t offset, size_t limit) {
  ordered_json j;
  j["id"] = doc.id;
  j["title"] = doc.title;
  j["metadata"] = MetadataObject(doc.metadata);
  j["total"] = doc.tokens.size();
  j["offset"] = offset;
  auto arr = ordered_json::array();
  for (size_t i = offset; i < doc.tokens.size() && i - offset < limit; ++i) {
    const Token& t = doc.tokens[i];
    ordered_json jt;
    jt["index"] = i;
    jt["surface"] = t.surface;
    jt["begin"] = t.begin;
    jt["end"] = t.end;
    jt["is_word"] = t.is_word;
    jt["level"] = LevelValue(t.link.level);
    jt["link"] = LinkJson(t.link);
    arr.push_back(std::move(jt));
  }
  j["tokens"] = std::move(arr);
  return j.dump();
}

std::string DocumentListJson(const std::vector<DocumentSummary>& docs, size_t offset,
                             size_t limit) {
  ordered_json j;
  j["total"] = docs.size();
  j["offset"] = offset;
  auto arr = ordered_json::array();
  for (size_t i = offset; i < docs.size() && i - offset < limit; ++i) {
    const DocumentSummary& d = docs[i];
    arr.push_back({{"id", d.id},
                   {"title", d.title},
                   {"metadata", MetadataObject(d.metadata)},
                   {"tokens", d.tokens},
                   {"word_tokens", d.word_tokens}});
  }
  j["documents"] = std::move(arr);
  return j.dump();
}

std::string MergeReportJson(const MergeReport& r) {
  ordered_json j;
  j["survivor_id"] = r.survivor_id;
  j["absorbed_id"] = r.absorbed_id;
  j["moved"] = r.moved;
  j["deduplicated"] = r.deduplicated;
  ordered_json remap = ordered_json::object();
  for (const auto& [from, to] : r.remap) remap[from] = to;
  j["remap"] = std::move(remap);
  j["event_seq"] = r.event_seq;
  return j.dump();
}

std::string LayerOverlapJson(const LayerOverlap& o) {
  ordered_json j;
  j["symbol"] = o.symbol;
  j["layer_a"] = o.layer_a;
  j["layer_b"] = o.layer_b;
  j["k"] = o.k;
  j["shared"] = o.shared;
  j["ratio"] = Round6(o.ratio);
  return j.dump();
}

std::string NeighborsJson(const SpaceKey& key, std::string_view seed,
                          const std::vector<std::pair<std::string, double>>& neighbors,
                          const Lexicon& lexicon) {
  ordered_json j;
  j["space"] = key.ToString();
  j["seed"] = seed;
  auto arr = ordered_json::array();
  for (const auto& [symbol, sim] : neighbors) {
    arr.push_back({{"symbol", symbol}, {"label", DisplayLabel(lexicon, symbol)}, {"sim", Round6(sim)}});
  }
  j["neighbors"] = std::move(arr);
  return j.dump();
}

struct Service::Impl {
  Workspace& ws;
  ServiceConfig config;
  httplib::Server server;
  int port = -1;

  Impl(Workspace& w, ServiceConfig c) : ws(w), config(std::move(c)) {}

  std::string RequireAuthor(const httplib::Request& req) {
    std::string author(Trim(req.get_header_value("X-Author")));
    if (author.empty()) throw HttpError(401, "validation", "X-Author header is required");
    if (!ws.Authors().count(author)) {
      throw HttpError(403, "validation", "author '" + author + "' may not edit");
    }
    return author;
  }

  void Persist() {
    if (config.autosave) ws.Save();
  }

  static void Reply(httplib::Response& res, const std::string& json, int status = 200) {
    res.status = status;
    res.set_content(json, "application/json");
  }

  void Routes() {
    auto& s = server;

    s.Get("/layers", [this](const httplib::Request&, httplib::Response& res) {
      // One entry per layer of the space registry, in key order.
      ordered_json arr = ordered_json::array();
      std::map<std::string, ordered_json> by_layer;
      std::vector<std::string> order;
      for (const SpaceRecord& r : ws.Spaces()) {
        if (!by_layer.count(r.key.layer)) {
          order.push_back(r.key.layer);
          by_layer[r.key.layer] = ordered_json::array();
        }
        by_layer[r.key.layer].push_back({{"key", r.key.ToString()},
                                         {"method", r.key.method},
                                         {"resolution", ResolutionName(r.key.resolution)},
                                         {"vocabulary", r.vocabulary}});
      }
      for (const std::string& id : order) {
        arr.push_back({{"id", id},
                       {"documents", ws.corpus().DocumentIds(CorpusLayer::Parse(id)).size()},
                       {"spaces", std::move(by_layer[id])}});
      }
      Reply(res, arr.dump());
    });

    s.Get("/graph", [this](const httplib::Request& req, httplib::Response& res) {
      std::string seed = Query(req, "seed");
      if (seed.empty()) throw Error(ErrorCode::kValidation, "parameter 'seed' is required");
      SpaceKey key = SelectSpace(ws, Query(req, "layer"), Query(req, "method"),
                                 Query(req, "resolution"));
      size_t m = QueryCount(req, "m", 100);
      double tau = QueryDouble(req, "threshold", 0.0);
      bool star = Query(req, "star") == "1" || Query(req, "star") == "true";
      Reply(res, GraphViewToJson(BuildWorkspaceGraph(ws, key, seed, m, tau, star)));
    });

    s.Post("/graph/overlap", [this](const httplib::Request& req, httplib::Response& res) {
      ordered_json body = ParseBody(req);
      std::string symbol = RequireString(body, "symbol");
      size_t k = body.value("k", size_t{10});
      SpaceKey a = SpaceKey::Parse(RequireString(body, "a"));
      SpaceKey b = SpaceKey::Parse(RequireString(body, "b"));
      auto sa = ws.Space(a);
      auto sb = ws.Space(b);
      std::string resolved = ResolveSeed(ws.lexicon(), *sa, symbol);
      Reply(res, LayerOverlapJson(ComputeLayerOverlap(resolved, *sa, *sb, k)));
    });

    s.Get("/lexicon/search", [this](const httplib::Request& req, httplib::Response& res) {
      std::string q = Query(req, "q");
      if (Trim(q).empty()) throw Error(ErrorCode::kValidation, "parameter 'q' is required");
      ordered_json j = ordered_json::parse(CandidatesJson(q, ws.lexicon().LookupWordform(q)));
      ordered_json sl = ordered_json::array();
      for (const Superlemma& x : ws.lexicon().FindSuperlemmataByForm(q)) sl.push_back(SuperlemmaJson(x));
      ordered_json lm = ordered_json::array();
      for (const Lemma& x : ws.lexicon().FindLemmataByForm(q)) lm.push_back(LemmaJson(x));
      j["superlemmata"] = std::move(sl);
      j["lemmata"] = std::move(lm);
      Reply(res, j.dump());
    });

    s.Post("/lexicon/superlemma", [this](const httplib::Request& req, httplib::Response& res) {
      std::string author = RequireAuthor(req);
      ordered_json body = ParseBody(req);
      Superlemma sl = ws.lexicon().CreateSuperlemma(RequireString(body, "form"),
                                                    ParsePosTag(RequireString(body, "pos")), author);
      Persist();
      Reply(res, SuperlemmaJson(sl).dump(), 201);
    });

    s.Post("/lexicon/lemma", [this](const httplib::Request& req, httplib::Response& res) {
      std::string author = RequireAuthor(req);
      ordered_json body = ParseBody(req);
      Lemma l = ws.lexicon().CreateLemma(RequireString(body, "superlemma_id"),
                                         RequireString(body, "form"), author);
      Persist();
      Reply(res, LemmaJson(l).dump(), 201);
    });

    s.Post("/lexicon/expand", [this](const httplib::Request& req, httplib::Response& res) {
      std::string author = RequireAuthor(req);
      ordered_json body = ParseBody(req);
      std::string lemma_id = RequireString(body, "lemma_id");
      std::vector<std::string> parts;
      if (!body.contains("parts") || !body["parts"].is_array()) {
        throw Error(ErrorCode::kValidation, "field 'parts' must be a list of principal parts");
      }
      for (const auto& p : body["parts"]) {
        if (!p.is_string()) throw Error(ErrorCode::kValidation, "principal parts are strings");
        parts.push_back(p.get<std::string>());
      }
      std::string cls = body.value("class", "auto");
      if (cls == "auto") {
        std::vector<std::string> found = ClassifyParadigm(ws.lexicon().PosOf(lemma_id), parts);
        if (found.size() != 1) {
          throw Error(ErrorCode::kClassification,
                      "ambiguous paradigm class: " + Join(found, ", ") + "; pass 'class'");
        }
        cls = found.front();
      }
      ExpansionOptions options;
      options.vocative = body.value("vocative", true);
      options.nominal_subparadigms = body.value("nominal_subparadigms", true);
      AddFormsResult r = ExpandLemma(ws.lexicon(), lemma_id, ParadigmRegistry::Default().Get(cls),
                                     parts, author, options);
      Persist();
      ordered_json words = ordered_json::array();
      for (const SyntacticWord& w : r.words) words.push_back(WordJson(w));
      Reply(res,
            ordered_json{{"lemma_id", lemma_id}, {"class", cls}, {"created", r.created},
                         {"syntactic_words", std::move(words)}}
                .dump(),
            201);
    });

    s.Post("/lexicon/merge", [this](const httplib::Request& req, httplib::Response& res) {
      std::string author = RequireAuthor(req);
      ordered_json body = ParseBody(req);
      MergeReport r = ws.lexicon().MergeLemmata(RequireString(body, "survivor_id"),
                                                RequireString(body, "absorbed_id"), author);
      Persist();
      Reply(res, MergeReportJson(r));
    });

    s.Get("/documents", [this](const httplib::Request& req, httplib::Response& res) {
      size_t offset = QueryCount(req, "offset", 0);
      size_t limit = QueryCount(req, "limit", config.page_size);
      Reply(res, DocumentListJson(ws.corpus().ListDocuments(), offset, limit));
    });

    s.Get(R"(/documents/([^/]+)/tokens)", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      size_t offset = QueryCount(req, "offset", 0);
      size_t limit = QueryCount(req, "limit", config.page_size);
      Reply(res, DocumentTokensJson(ws.corpus().GetDocument(req.matches[1].str()), offset, limit));
    });

    s.Post(R"(/documents/([^/]+)/tokens/(\d+)/link)", [this](const httplib::Request& req,
                                                             httplib::Response& res) {
      std::string author = RequireAuthor(req);
      ordered_json body = ParseBody(req);
      size_t index = std::stoull(req.matches[2].str());
      LinkAction action = ParseLinkAction(body.value("action", "confirm"));
      TokenLink link = ws.corpus().LinkToken(req.matches[1].str(), index,
                                             RequireString(body, "chosen"), author, action);
      Persist();
      Reply(res, TokenLinkJson(link));
    });

    s.Get("/stats/coverage", [this](const httplib::Request& req, httplib::Response& res) {
      CorpusLayer layer = CorpusLayer::Parse(Query(req, "layer"));
      Reply(res, ComputeCoverage(ws.corpus(), ws.lexicon(), layer).ToJson());
    });

    s.Get("/stats/curve", [this](const httplib::Request& req, httplib::Response& res) {
      CorpusLayer layer = CorpusLayer::Parse(Query(req, "layer"));
      std::vector<double> grid =
          req.has_param("grid") ? ParseGrid(req.get_param_value("grid")) : DefaultPercentGrid();
      Reply(res, CurveToJson(layer.id, CoverageCurve(ws.corpus(), ws.lexicon(), layer, grid)));
    });

    s.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                               std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const HttpError& e) {
        Reply(res, ApiErrorJson(e.code, e.what()), e.status);
      } catch (const Error& e) {
        Reply(res, ApiErrorJson(ApiErrorCode(e.code()), e.what(), e.location()),
              HttpStatus(e.code()));
      } catch (const std::exception& e) {
        Reply(res, ApiErrorJson("internal", e.what()), 500);
      } catch (...) {
        Reply(res, ApiErrorJson("internal", "unknown failure"), 500);
      }
    });

    s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      std::string code = res.status == 404 ? "not_found" : res.status < 500 ? "validation" : "internal";
      std::string message = res.status == 404 ? "no route for " + req.method + " " + req.path
                                              : "request failed with status " + std::to_string(res.status);
      res.set_content(ApiErrorJson(code, message), "application/json");
    });
  }
};

Service::Service(Workspace& workspace, ServiceConfig config)
    : impl_(std::make_unique<Impl>(workspace, std::move(config))) {
  unsigned n = std::max(1u, impl_->config.threads);
  impl_->server.new_task_queue = [n] { return new httplib::ThreadPool(n); };
  impl_->Routes();
}

Service::~Service() { Stop(); }

int Service::Bind() {
  auto& cfg = impl_->config;
  if (cfg.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(cfg.host);
    if (impl_->port < 0) throw Error(ErrorCode::kIo, "cannot bind " + cfg.host);
  } else {
    if (!impl_->server.bind_to_port(cfg.host, cfg.port)) {
      throw Error(ErrorCode::kIo,
                  "cannot bind " + cfg.host + ":" + std::to_string(cfg.port) + " (port in use?)");
    }
    impl_->port = cfg.port;
  }
  return impl_->port;
}

void Service::Run() {
  if (impl_->port < 0) Bind();
  impl_->server.listen_after_bind();
}

void Service::Stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

int Service::port() const { return impl_->port; }

}  // namespace latinlex
