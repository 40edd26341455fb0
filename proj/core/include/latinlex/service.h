#ifndef LATINLEX_SERVICE_H_
#define LATINLEX_SERVICE_H_

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "latinlex/error.h"
#include "latinlex/graphview.h"
#include "latinlex/workspace.h"

namespace latinlex {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0: any free port
  size_t page_size = 200;
  bool autosave = true;  // persist the workspace after every mutation
  unsigned threads = 4;
};

// ApiError codes exposed over HTTP.
std::string_view ApiErrorCode(ErrorCode code);
int HttpStatus(ErrorCode code);
std::string ApiErrorJson(std::string_view code, std::string_view message,
                         std::string_view location = {});

// JSON renderings shared by the HTTP API and the command line.
std::string CandidatesJson(std::string_view query, const std::vector<Candidate>& candidates);
std::string TokenLinkJson(const TokenLink& link);
std::string DocumentTokensJson(const Document& doc, size_t offset, size_t limit);
std::string DocumentListJson(const std::vector<DocumentSummary>& docs, size_t offset, size_t limit);
std::string MergeReportJson(const MergeReport& report);
std::string LayerOverlapJson(const LayerOverlap& overlap);
std::string NeighborsJson(const SpaceKey& key, std::string_view seed,
                          const std::vector<std::pair<std::string, double>>& neighbors,
                          const Lexicon& lexicon);

// JSON API over a workspace:
//   GET  /layers
//   GET  /graph?layer&method&resolution&seed&m&threshold[&star]
//   POST /graph/overlap
//   GET  /lexicon/search?q
//   POST /lexicon/superlemma | /lexicon/lemma | /lexicon/expand | /lexicon/merge
//   GET  /documents
//   GET  /documents/{id}/tokens[?offset&limit]
//   POST /documents/{id}/tokens/{i}/link
//   GET  /stats/coverage?layer
//   GET  /stats/curve?layer[&grid]
// Mutating requests need an X-Author header naming an identity from the
// workspace's authors.txt.
class Service {
 public:
  Service(Workspace& workspace, ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the socket; Error(kIo) if the address is taken. Returns the port.
  int Bind();
  // Serves until Stop(); Bind() first.
  void Run();
  void Stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace latinlex

#endif  // LATINLEX_SERVICE_H_
