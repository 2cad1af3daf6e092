#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gatt/errors.hpp"
#include "gatt/graph.hpp"

using namespace gatt;

namespace {

Graph tiny(int n, std::vector<Edge> edges, bool undirected = false) {
  Graph g;
  g.num_nodes = n;
  g.undirected = undirected;
  std::sort(edges.begin(), edges.end());
  g.edges = std::move(edges);
  g.features.assign(static_cast<std::size_t>(n), {1.0});
  return g;
}

}  // namespace

TEST_CASE("minimal two-node file loads") {
  nlohmann::json j = {{"num_nodes", 2},
                      {"edges", {{0, 1}, {1, 0}}},
                      {"features", {{1.0}, {1.0}}}};
  const Graph g = graph_from_json(j);
  CHECK(g.num_nodes == 2);
  CHECK(g.edges.size() == 2);
  CHECK(g.has_edge({0, 1}));
  CHECK(g.has_edge({1, 0}));
}

TEST_CASE("out-of-range edge index rejected") {
  nlohmann::json j = {{"num_nodes", 2},
                      {"edges", {{0, 5}}},
                      {"features", {{1.0}, {1.0}}}};
  CHECK_THROWS_AS(graph_from_json(j), ValidationError);
}

TEST_CASE("missing fields and malformed entries rejected") {
  CHECK_THROWS_AS(graph_from_json({{"edges", nlohmann::json::array()}}),
                  ValidationError);
  nlohmann::json bad = {{"num_nodes", 2},
                        {"edges", {{0}}},
                        {"features", {{1.0}, {1.0}}}};
  CHECK_THROWS_AS(graph_from_json(bad), ValidationError);
}

TEST_CASE("undirected input materializes both arcs") {
  nlohmann::json j = {{"num_nodes", 3},
                      {"undirected", true},
                      {"edges", {{0, 1}, {1, 2}}},
                      {"features", {{1.0}, {1.0}, {1.0}}}};
  const Graph g = graph_from_json(j);
  CHECK(g.edges.size() == 4);
  CHECK(g.has_edge({1, 0}));
  CHECK(g.has_edge({2, 1}));
}

TEST_CASE("json round-trip is the identity") {
  Graph g = tiny(3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}}, true);
  g.labels = std::vector<int>{0, 1, 0};
  g.ground_truth_edges = {{0, 1}, {1, 0}};
  g.meta = {{"origin", "test"}};
  g.validate();
  const Graph back = graph_from_json(graph_to_json(g));
  CHECK(back.num_nodes == g.num_nodes);
  CHECK(back.edges == g.edges);
  CHECK(back.features == g.features);
  CHECK(back.labels == g.labels);
  CHECK(back.ground_truth_edges == g.ground_truth_edges);
  CHECK(back.meta == g.meta);
}

TEST_CASE("save/load round-trip on disk") {
  const auto path = std::filesystem::temp_directory_path() / "gatt_graph_rt.json";
  Graph g = tiny(2, {{0, 1}});
  save_graph(g, path);
  const Graph back = load_graph(path);
  CHECK(back.edges == g.edges);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_graph(path), ValidationError);
}

TEST_CASE("add_self_loops adds every loop and is idempotent") {
  const Graph g = tiny(2, {{0, 1}});
  const Graph sl = add_self_loops(g);
  CHECK(sl.edges == std::vector<Edge>{{0, 0}, {0, 1}, {1, 1}});
  CHECK(add_self_loops(sl).edges == sl.edges);
}

TEST_CASE("k_hop_edge_set star graph, k=1") {
  // leaves 1..3 all point at center 0
  const Graph g = tiny(4, {{1, 0}, {2, 0}, {3, 0}});
  const auto scope = k_hop_edge_set(g, 0, 1);
  CHECK(scope == std::vector<Edge>{{0, 0}, {1, 0}, {2, 0}, {3, 0}});
}

TEST_CASE("k_hop_edge_set path a->b->c, target c, k=2") {
  const Graph g = tiny(3, {{0, 1}, {1, 2}});
  const auto scope = k_hop_edge_set(g, 2, 2);
  CHECK(scope == std::vector<Edge>{{0, 1}, {1, 1}, {1, 2}, {2, 2}});
}

TEST_CASE("k_hop_edge_set respects edge direction") {
  // 0 -> 1; nothing reaches node 0 except itself
  const Graph g = tiny(2, {{0, 1}});
  CHECK(k_hop_edge_set(g, 0, 3) == std::vector<Edge>{{0, 0}});
}

TEST_CASE("k_hop_edge_set grows monotonically with k") {
  const Graph g = tiny(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
  for (int k = 1; k < 5; ++k) {
    const auto a = k_hop_edge_set(g, 0, k);
    const auto b = k_hop_edge_set(g, 0, k + 1);
    CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
  }
}

TEST_CASE("k_hop_edge_set validates inputs") {
  const Graph g = tiny(2, {{0, 1}});
  CHECK_THROWS_AS(k_hop_edge_set(g, -1, 1), ValidationError);
  CHECK_THROWS_AS(k_hop_edge_set(g, 2, 1), ValidationError);
  CHECK_THROWS_AS(k_hop_edge_set(g, 0, 0), ValidationError);
}

TEST_CASE("InAdjacency lists sorted in-neighbors") {
  const Graph g = add_self_loops(tiny(3, {{0, 2}, {1, 2}, {2, 0}}));
  const InAdjacency adj(g);
  const auto in2 = adj.in_neighbors(2);
  CHECK(std::vector<int>(in2.begin(), in2.end()) == std::vector<int>{0, 1, 2});
  const auto in1 = adj.in_neighbors(1);
  CHECK(std::vector<int>(in1.begin(), in1.end()) == std::vector<int>{1});
}

TEST_CASE("validate catches inconsistencies") {
  Graph g = tiny(2, {{0, 1}});
  g.features.pop_back();
  CHECK_THROWS_AS(g.validate(), ValidationError);

  Graph dup = tiny(2, {{0, 1}});
  dup.edges.push_back({0, 1});
  CHECK_THROWS_AS(dup.validate(), ValidationError);

  Graph undir = tiny(2, {{0, 1}});
  undir.undirected = true;
  CHECK_THROWS_AS(undir.validate(), ValidationError);

  Graph gt = tiny(2, {{0, 1}});
  gt.ground_truth_edges = {{1, 0}};
  CHECK_THROWS_AS(gt.validate(), ValidationError);
}
