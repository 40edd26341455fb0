#ifndef LATINLEX_GRAPHVIEW_H_
#define LATINLEX_GRAPHVIEW_H_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latinlex/embedding_space.h"

namespace latinlex {

struct GraphViewSpec {
  SpaceKey key;
  std::string seed;
  size_t m = 100;
  double threshold = 0;  // tau
  bool star = false;     // seed-to-neighbor edges only, instead of all pairs
};

struct GraphNode {
  std::string symbol;
  std::string label;
  double sim = 0;  // cosine to the seed
  size_t degree = 0;
  std::optional<std::string> topic;
  std::optional<double> membership;
  std::optional<std::map<std::string, double>> dist;

  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  size_t s = 0;  // node indices, s < t
  size_t t = 0;
  double w = 0;

  bool operator==(const GraphEdge&) const = default;
};

struct GraphView {
  GraphViewSpec spec;
  std::vector<GraphNode> nodes;  // seed first, then neighbors by similarity
  std::vector<GraphEdge> edges;  // sorted by (s, t)
};

// Maps a symbol to its display label (e.g. an entry id to its form).
using LabelFn = std::function<std::string(std::string_view)>;

// Nodes: the seed and its m nearest neighbors. Edges: every pair of nodes
// with cosine >= tau (only seed pairs in star mode). Isolated nodes stay.
// Throws Error(kNotFound) if the seed is not in the vocabulary.
GraphView BuildLocalGraphView(const EmbeddingSpace& space, const GraphViewSpec& spec,
                              const LabelFn& label = nullptr);

// Keeps edges with weight >= tau and recomputes degrees. tau below the
// view's threshold cannot be served from the view: Error(kStaleView).
GraphView FilterThreshold(const GraphView& view, double tau);

std::map<std::string, size_t> DegreeCentrality(const GraphView& view);

struct LayerOverlap {
  std::string symbol;
  std::string layer_a;
  std::string layer_b;
  size_t k = 0;
  size_t shared = 0;
  double ratio = 0;  // shared / k
};

// Share of the symbol's top-k neighbors common to both spaces. Throws
// Error(kNotFound) if either space lacks the symbol.
LayerOverlap ComputeLayerOverlap(std::string_view symbol, const EmbeddingSpace& a,
                                 const EmbeddingSpace& b, size_t k);

// JSON with floats at 6 decimals. Node ids index into the node array.
std::string GraphViewToJson(const GraphView& view);
GraphView GraphViewFromJson(std::string_view json);
// Empty if the document matches the schema, otherwise the problems found.
std::vector<std::string> ValidateGraphViewJson(std::string_view json);
void ExportGraphView(const GraphView& view, const std::string& path);
GraphView ImportGraphView(const std::string& path);

double Round6(double x);

}  // namespace latinlex

#endif  // LATINLEX_GRAPHVIEW_H_
