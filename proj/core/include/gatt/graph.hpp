#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace gatt {

using Edge = std::pair<int, int>;  // directed (src, dst)

// Directed edge-list graph with per-node features, optional labels and
// optional ground-truth explanation edges. Edges are kept sorted
// lexicographically and duplicate-free; immutable after construction.
struct Graph {
  int num_nodes = 0;
  bool undirected = false;
  std::vector<Edge> edges;
  std::vector<std::vector<double>> features;
  std::optional<std::vector<int>> labels;
  std::vector<Edge> ground_truth_edges;
  nlohmann::json meta = nlohmann::json::object();

  int feature_dim() const {
    return features.empty() ? 0 : static_cast<int>(features.front().size());
  }
  bool has_edge(const Edge& e) const;
  bool has_all_self_loops() const;

  // Throws ValidationError if any type invariant is violated.
  void validate() const;
};

// In-neighbor adjacency in CSR form: for each destination j, the sorted
// list of sources i with (i, j) in the edge set.
struct InAdjacency {
  std::vector<int> offsets;  // size num_nodes + 1
  std::vector<int> sources;

  explicit InAdjacency(const Graph& g);
  std::span<const int> in_neighbors(int dst) const {
    return {sources.data() + offsets[static_cast<std::size_t>(dst)],
            static_cast<std::size_t>(offsets[static_cast<std::size_t>(dst) + 1] -
                                     offsets[static_cast<std::size_t>(dst)])};
  }
};

nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

Graph load_graph(const std::filesystem::path& path);
void save_graph(const Graph& g, const std::filesystem::path& path);

// Adds (i, i) for every node; idempotent, never removes edges.
Graph add_self_loops(const Graph& g);

// Directed edges (self-loops included) reachable backward from v within
// k message-passing steps, i.e. edges (i, j) where j lies at most k-1
// hops upstream of v. Computed on the self-looped edge set. Sorted.
std::vector<Edge> k_hop_edge_set(const Graph& g, int v, int k);

}  // namespace gatt
