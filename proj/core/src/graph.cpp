#include "gatt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>

#include "gatt/errors.hpp"

namespace gatt {

bool Graph::has_edge(const Edge& e) const {
  return std::binary_search(edges.begin(), edges.end(), e);
}

bool Graph::has_all_self_loops() const {
  for (int i = 0; i < num_nodes; ++i) {
    if (!has_edge({i, i})) return false;
  }
  return true;
}

void Graph::validate() const {
  if (num_nodes < 0) throw ValidationError("num_nodes must be non-negative");
  if (!std::is_sorted(edges.begin(), edges.end())) {
    throw ValidationError("edges must be sorted lexicographically");
  }
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw ValidationError("duplicate directed edge");
  }
  for (const auto& [s, d] : edges) {
    if (s < 0 || s >= num_nodes || d < 0 || d >= num_nodes) {
      throw ValidationError("edge index out of range: (" + std::to_string(s) +
                            "," + std::to_string(d) + ") with num_nodes=" +
                            std::to_string(num_nodes));
    }
  }
  if (undirected) {
    for (const auto& [s, d] : edges) {
      if (s != d && !has_edge({d, s})) {
        throw ValidationError("undirected graph missing reverse arc of (" +
                              std::to_string(s) + "," + std::to_string(d) + ")");
      }
    }
  }
  if (static_cast<int>(features.size()) != num_nodes) {
    throw ValidationError("features must have one row per node");
  }
  const std::size_t f = features.empty() ? 0 : features.front().size();
  for (const auto& row : features) {
    if (row.size() != f) throw ValidationError("ragged feature rows");
    for (double x : row) {
      if (!std::isfinite(x)) throw ValidationError("non-finite feature value");
    }
  }
  if (labels && static_cast<int>(labels->size()) != num_nodes) {
    throw ValidationError("labels must have one entry per node");
  }
  for (const auto& e : ground_truth_edges) {
    if (!has_edge(e)) {
      throw ValidationError("ground_truth_edges must be a subset of edges");
    }
  }
}

InAdjacency::InAdjacency(const Graph& g) {
  offsets.assign(static_cast<std::size_t>(g.num_nodes) + 1, 0);
  for (const auto& [s, d] : g.edges) {
    ++offsets[static_cast<std::size_t>(d) + 1];
  }
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
  sources.resize(g.edges.size());
  std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& [s, d] : g.edges) {
    sources[static_cast<std::size_t>(cursor[static_cast<std::size_t>(d)]++)] = s;
  }
  // edges are sorted by (src, dst), so each destination's bucket fills
  // in ascending source order already
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) {
    throw ValidationError(std::string("graph schema: missing field '") + name +
                          "'");
  }
  return j.at(name);
}

std::vector<Edge> parse_edge_list(const nlohmann::json& arr, const char* field) {
  if (!arr.is_array()) {
    throw ValidationError(std::string("graph schema: '") + field +
                          "' must be an array");
  }
  std::vector<Edge> edges;
  edges.reserve(arr.size());
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw ValidationError(std::string("graph schema: '") + field +
                            "' entries must be [int,int]");
    }
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return edges;
}

}  // namespace

nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["num_nodes"] = g.num_nodes;
  j["undirected"] = g.undirected;
  j["features"] = g.features;
  if (g.labels) j["labels"] = *g.labels;
  auto edges = g.edges;
  std::sort(edges.begin(), edges.end());
  nlohmann::json je = nlohmann::json::array();
  for (const auto& [s, d] : edges) je.push_back({s, d});
  j["edges"] = std::move(je);
  if (!g.ground_truth_edges.empty()) {
    auto gt = g.ground_truth_edges;
    std::sort(gt.begin(), gt.end());
    nlohmann::json jg = nlohmann::json::array();
    for (const auto& [s, d] : gt) jg.push_back({s, d});
    j["ground_truth_edges"] = std::move(jg);
  }
  j["meta"] = g.meta;
  return j;
}

Graph graph_from_json(const nlohmann::json& j) {
  Graph g;
  const auto& jn = require_field(j, "num_nodes");
  if (!jn.is_number_integer()) {
    throw ValidationError("graph schema: 'num_nodes' must be an integer");
  }
  g.num_nodes = jn.get<int>();
  if (j.contains("undirected")) {
    if (!j.at("undirected").is_boolean()) {
      throw ValidationError("graph schema: 'undirected' must be a boolean");
    }
    g.undirected = j.at("undirected").get<bool>();
  }
  const auto& jf = require_field(j, "features");
  if (!jf.is_array()) {
    throw ValidationError("graph schema: 'features' must be an array");
  }
  g.features = jf.get<std::vector<std::vector<double>>>();
  if (j.contains("labels")) {
    g.labels = j.at("labels").get<std::vector<int>>();
  }
  g.edges = parse_edge_list(require_field(j, "edges"), "edges");
  std::sort(g.edges.begin(), g.edges.end());
  if (g.undirected) {
    // materialize both arcs; attribution is per directed edge
    std::set<Edge> closure(g.edges.begin(), g.edges.end());
    for (const auto& [s, d] : g.edges) closure.insert({d, s});
    g.edges.assign(closure.begin(), closure.end());
  }
  if (j.contains("ground_truth_edges")) {
    g.ground_truth_edges =
        parse_edge_list(j.at("ground_truth_edges"), "ground_truth_edges");
    std::sort(g.ground_truth_edges.begin(), g.ground_truth_edges.end());
  }
  if (j.contains("meta")) g.meta = j.at("meta");
  g.validate();
  return g;
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open graph file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed graph JSON in " + path.string() + ": " +
                          e.what());
  }
  return graph_from_json(j);
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write graph file: " + path.string());
  out << graph_to_json(g).dump(2) << '\n';
}

Graph add_self_loops(const Graph& g) {
  Graph out = g;
  for (int i = 0; i < g.num_nodes; ++i) {
    Edge loop{i, i};
    if (!g.has_edge(loop)) out.edges.push_back(loop);
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

std::vector<Edge> k_hop_edge_set(const Graph& g, int v, int k) {
  if (v < 0 || v >= g.num_nodes) {
    throw ValidationError("k_hop_edge_set: invalid node index " +
                          std::to_string(v));
  }
  if (k < 1) throw ValidationError("k_hop_edge_set: k must be >= 1");
  const Graph sl = g.has_all_self_loops() ? g : add_self_loops(g);
  // dist[j] = fewest message-passing steps from j to v along directed edges
  std::vector<int> dist(static_cast<std::size_t>(g.num_nodes), -1);
  std::vector<std::vector<int>> in_of(static_cast<std::size_t>(g.num_nodes));
  for (const auto& [s, d] : sl.edges) {
    if (s != d) in_of[static_cast<std::size_t>(d)].push_back(s);
  }
  std::deque<int> queue{v};
  dist[static_cast<std::size_t>(v)] = 0;
  while (!queue.empty()) {
    int j = queue.front();
    queue.pop_front();
    if (dist[static_cast<std::size_t>(j)] >= k - 1) continue;
    for (int i : in_of[static_cast<std::size_t>(j)]) {
      if (dist[static_cast<std::size_t>(i)] < 0) {
        dist[static_cast<std::size_t>(i)] = dist[static_cast<std::size_t>(j)] + 1;
        queue.push_back(i);
      }
    }
  }
  std::vector<Edge> result;
  for (const auto& e : sl.edges) {
    int dj = dist[static_cast<std::size_t>(e.second)];
    if (dj >= 0 && dj <= k - 1) result.push_back(e);
  }
  return result;
}

}  // namespace gatt
