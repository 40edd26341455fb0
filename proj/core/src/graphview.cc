#include "latinlex/graphview.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "latinlex/error.h"
#include "latinlex/lexicon_io.h"

namespace latinlex {
namespace {

using ordered_json = nlohmann::ordered_json;

void RecomputeDegrees(GraphView& view) {
  for (GraphNode& n : view.nodes) n.degree = 0;
  for (const GraphEdge& e : view.edges) {
    ++view.nodes[e.s].degree;
    ++view.nodes[e.t].degree;
  }
}

}  // namespace

double Round6(double x) {
  // x * 1e6 can round onto a .5 the exact product does not reach; the fma
  // residual tells which side it was on.
  double p = x * 1e6;
  double err = std::fma(x, 1e6, -p);
  double fl = std::floor(p);
  double k = (p - fl == 0.5 && err != 0) ? (err > 0 ? fl + 1 : fl) : std::round(p);
  double r = k / 1e6;
  return r == 0 ? 0.0 : r;  // no negative zero in the output
}

GraphView BuildLocalGraphView(const EmbeddingSpace& space, const GraphViewSpec& spec,
                              const LabelFn& label) {
  if (std::isnan(spec.threshold)) throw Error(ErrorCode::kValidation, "threshold is not a number");
  GraphView view;
  view.spec = spec;
  auto neighbors = space.NearestNeighbors(spec.seed, spec.m);
  std::vector<size_t> rows;
  GraphNode seed;
  seed.symbol = spec.seed;
  seed.sim = 1.0;
  view.nodes.push_back(seed);
  rows.push_back(*space.Find(spec.seed));
  for (auto& [symbol, sim] : neighbors) {
    GraphNode n;
    n.symbol = symbol;
    n.sim = Round6(sim);
    view.nodes.push_back(std::move(n));
    rows.push_back(*space.Find(symbol));
  }
  for (GraphNode& n : view.nodes) n.label = label ? label(n.symbol) : n.symbol;

  // Weights are rounded before the threshold test so that a view rebuilt at
  // tau and a view filtered down to tau agree exactly.
  for (size_t s = 0; s < rows.size(); ++s) {
    for (size_t t = s + 1; t < rows.size(); ++t) {
      if (spec.star && s != 0) break;
      double w = Round6(Cosine(space.Row(rows[s]), space.Row(rows[t])));
      if (w >= spec.threshold) view.edges.push_back({s, t, w});
    }
  }
  RecomputeDegrees(view);
  return view;
}

GraphView FilterThreshold(const GraphView& view, double tau) {
  if (std::isnan(tau)) throw Error(ErrorCode::kValidation, "threshold is not a number");
  if (tau < view.spec.threshold) {
    throw Error(ErrorCode::kStaleView, "threshold " + std::to_string(tau) +
                                           " is below the view's threshold " +
                                           std::to_string(view.spec.threshold) + "; rebuild");
  }
  GraphView out;
  out.spec = view.spec;
  out.spec.threshold = tau;
  out.nodes = view.nodes;
  for (const GraphEdge& e : view.edges) {
    if (e.w >= tau) out.edges.push_back(e);
  }
  RecomputeDegrees(out);
  return out;
}

std::map<std::string, size_t> DegreeCentrality(const GraphView& view) {
  std::map<std::string, size_t> out;
  for (const GraphNode& n : view.nodes) out[n.symbol] = 0;
  for (const GraphEdge& e : view.edges) {
    ++out[view.nodes[e.s].symbol];
    ++out[view.nodes[e.t].symbol];
  }
  return out;
}

LayerOverlap ComputeLayerOverlap(std::string_view symbol, const EmbeddingSpace& a,
                                 const EmbeddingSpace& b, size_t k) {
  if (k == 0) throw Error(ErrorCode::kValidation, "k must be positive");
  auto na = a.NearestNeighbors(symbol, k);
  auto nb = b.NearestNeighbors(symbol, k);
  std::vector<std::string> sa, sb;
  for (auto& [s, sim] : na) sa.push_back(s);
  for (auto& [s, sim] : nb) sb.push_back(s);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<std::string> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  LayerOverlap o;
  o.symbol = std::string(symbol);
  o.layer_a = a.key().ToString();
  o.layer_b = b.key().ToString();
  o.k = k;
  o.shared = common.size();
  o.ratio = static_cast<double>(o.shared) / static_cast<double>(k);
  return o;
}

std::string GraphViewToJson(const GraphView& view) {
  ordered_json j;
  j["layer"] = view.spec.key.layer;
  j["method"] = view.spec.key.method;
  j["resolution"] = ResolutionName(view.spec.key.resolution);
  j["seed"] = view.spec.seed;
  j["m"] = view.spec.m;
  j["threshold"] = Round6(view.spec.threshold);
  if (view.spec.star) j["star"] = true;
  auto nodes = ordered_json::array();
  for (size_t i = 0; i < view.nodes.size(); ++i) {
    const GraphNode& n = view.nodes[i];
    ordered_json jn;
    jn["id"] = i;
    jn["symbol"] = n.symbol;
    jn["label"] = n.label;
    jn["sim"] = Round6(n.sim);
    jn["degree"] = n.degree;
    if (n.topic) jn["topic"] = *n.topic;
    if (n.membership) jn["membership"] = Round6(*n.membership);
    if (n.dist) {
      ordered_json d = ordered_json::object();
      for (const auto& [k, v] : *n.dist) d[k] = Round6(v);
      jn["dist"] = std::move(d);
    }
    nodes.push_back(std::move(jn));
  }
  j["nodes"] = std::move(nodes);
  auto edges = ordered_json::array();
  for (const GraphEdge& e : view.edges) {
    edges.push_back(ordered_json{{"s", e.s}, {"t", e.t}, {"w", Round6(e.w)}});
  }
  j["edges"] = std::move(edges);
  return j.dump();
}

std::vector<std::string> ValidateGraphViewJson(std::string_view json) {
  std::vector<std::string> problems;
  ordered_json j;
  try {
    j = ordered_json::parse(json);
  } catch (const ordered_json::parse_error& e) {
    return {std::string("not JSON: ") + e.what()};
  }
  auto need = [&](const ordered_json& obj, const char* key, auto check, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      problems.push_back(where + ": missing '" + key + "'");
      return false;
    }
    if (!check(obj[key])) {
      problems.push_back(where + ": '" + key + "' has the wrong type");
      return false;
    }
    return true;
  };
  auto is_string = [](const ordered_json& v) { return v.is_string(); };
  auto is_count = [](const ordered_json& v) { return v.is_number_unsigned(); };
  auto is_number = [](const ordered_json& v) { return v.is_number(); };
  if (!j.is_object()) return {"top level is not an object"};
  need(j, "layer", is_string, "view");
  need(j, "method", is_string, "view");
  if (need(j, "resolution", is_string, "view")) {
    try {
      ParseResolution(j["resolution"].get<std::string>());
    } catch (const Error&) {
      problems.push_back("view: unknown resolution");
    }
  }
  need(j, "seed", is_string, "view");
  need(j, "m", is_count, "view");
  need(j, "threshold", is_number, "view");
  size_t node_count = 0;
  if (need(j, "nodes", [](const ordered_json& v) { return v.is_array(); }, "view")) {
    node_count = j["nodes"].size();
    if (j.contains("m") && j["m"].is_number_unsigned() && node_count > j["m"].get<size_t>() + 1) {
      problems.push_back("view: more than m + 1 nodes");
    }
    if (node_count == 0) problems.push_back("view: the seed node is missing");
    for (size_t i = 0; i < node_count; ++i) {
      const auto& n = j["nodes"][i];
      std::string where = "node " + std::to_string(i);
      if (need(n, "id", is_count, where) && n["id"].get<size_t>() != i) {
        problems.push_back(where + ": id does not match its position");
      }
      need(n, "label", is_string, where);
      if (need(n, "sim", is_number, where)) {
        double s = n["sim"].get<double>();
        if (s < -1 || s > 1) problems.push_back(where + ": sim outside [-1, 1]");
        if (i == 0 && s != 1.0) problems.push_back(where + ": seed sim must be 1");
      }
      need(n, "degree", is_count, where);
      if (n.contains("topic") && !n["topic"].is_string()) problems.push_back(where + ": bad topic");
      if (n.contains("membership")) {
        if (!n["membership"].is_number() || n["membership"].get<double>() < 0 ||
            n["membership"].get<double>() > 1) {
          problems.push_back(where + ": membership outside [0, 1]");
        }
      }
      if (n.contains("dist") && !n["dist"].is_object()) problems.push_back(where + ": bad dist");
    }
  }
  if (need(j, "edges", [](const ordered_json& v) { return v.is_array(); }, "view")) {
    std::vector<size_t> degree(node_count, 0);
    double tau = j.contains("threshold") && j["threshold"].is_number() ? j["threshold"].get<double>()
                                                                         : -1.0;
    for (size_t i = 0; i < j["edges"].size(); ++i) {
      const auto& e = j["edges"][i];
      std::string where = "edge " + std::to_string(i);
      bool ok = need(e, "s", is_count, where) & need(e, "t", is_count, where) &
                need(e, "w", is_number, where);
      if (!ok) continue;
      size_t s = e["s"].get<size_t>(), t = e["t"].get<size_t>();
      if (s >= t || t >= node_count) {
        problems.push_back(where + ": endpoints must satisfy s < t < node count");
        continue;
      }
      if (e["w"].get<double>() < tau) problems.push_back(where + ": weight below threshold");
      ++degree[s];
      ++degree[t];
    }
    if (problems.empty()) {
      for (size_t i = 0; i < node_count; ++i) {
        if (j["nodes"][i]["degree"].get<size_t>() != degree[i]) {
          problems.push_back("node " + std::to_string(i) + ": degree does not match the edges");
        }
      }
    }
  }
  return problems;
}

GraphView GraphViewFromJson(std::string_view json) {
  std::vector<std::string> problems = ValidateGraphViewJson(json);
  if (!problems.empty()) throw Error(ErrorCode::kParse, "invalid graph view: " + problems.front());
  ordered_json j = ordered_json::parse(json);
  GraphView view;
  view.spec.key.layer = j["layer"].get<std::string>();
  view.spec.key.method = j["method"].get<std::string>();
  view.spec.key.resolution = ParseResolution(j["resolution"].get<std::string>());
  view.spec.seed = j["seed"].get<std::string>();
  view.spec.m = j["m"].get<size_t>();
  view.spec.threshold = j["threshold"].get<double>();
  view.spec.star = j.value("star", false);
  for (const auto& jn : j["nodes"]) {
    GraphNode n;
    n.label = jn["label"].get<std::string>();
    n.symbol = jn.value("symbol", n.label);
    n.sim = jn["sim"].get<double>();
    n.degree = jn["degree"].get<size_t>();
    if (jn.contains("topic")) n.topic = jn["topic"].get<std::string>();
    if (jn.contains("membership")) n.membership = jn["membership"].get<double>();
    if (jn.contains("dist")) n.dist = jn["dist"].get<std::map<std::string, double>>();
    view.nodes.push_back(std::move(n));
  }
  for (const auto& je : j["edges"]) {
    view.edges.push_back({je["s"].get<size_t>(), je["t"].get<size_t>(), je["w"].get<double>()});
  }
  return view;
}

void ExportGraphView(const GraphView& view, const std::string& path) {
  WriteFile(path, GraphViewToJson(view) + "\n");
}

GraphView ImportGraphView(const std::string& path) {
  try {
    return GraphViewFromJson(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw Error(e.code(), e.what(), path);
    throw;
  }
}

}  // namespace latinlex
