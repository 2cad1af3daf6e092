#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "gatt/graph.hpp"

namespace gatt {

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Graph plus node split and the full record of generation parameters.
// (seed, generator_config) regenerates the bundle bit-exactly.
struct DatasetBundle {
  Graph graph;
  Split split;
  nlohmann::json generator_config = nlohmann::json::object();

  // Infection only: one chosen shortest path per evaluable target, and
  // targets excluded because several shortest paths tie.
  std::map<int, std::vector<Edge>> ground_truth_paths;
  std::vector<int> ambiguous_targets;
};

struct BaShapesConfig {
  int n_base = 300;
  int n_motifs = 80;
  int n_random_edges = -1;  // -1: default to num_nodes / 10
};

struct InfectionConfig {
  int n_nodes = 1000;
  double edge_prob = 0.004;
  int n_infected = 50;
  int max_dist = 4;  // labels 0..max_dist, so max_dist + 1 classes
};

// Barabasi-Albert base graph (attachment parameter 1) with house-shaped
// 5-node motifs attached by one edge each, plus uniformly random extra
// edges. Labels: 0 base, 1 house top, 2 middle, 3 bottom. Ground truth:
// the 12 directed within-motif arcs per motif.
DatasetBundle generate_ba_shapes(std::uint64_t seed, const BaShapesConfig& cfg = {});

// Erdos-Renyi backbone with a set of infected nodes; label = distance to
// the nearest infected node, clamped at max_dist. Features are a one-hot
// infected indicator. Ground truth per target: the unique shortest path
// from an infected node, when it is unique.
DatasetBundle generate_infection(std::uint64_t seed, const InfectionConfig& cfg = {});

void save_bundle(const DatasetBundle& b, const std::filesystem::path& path);
DatasetBundle load_bundle(const std::filesystem::path& path);

nlohmann::json bundle_to_json(const DatasetBundle& b);
DatasetBundle bundle_from_json(const nlohmann::json& j);

}  // namespace gatt
