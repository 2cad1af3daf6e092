#include "gatt/dataset.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "gatt/errors.hpp"
#include "gatt/rng.hpp"

namespace gatt {

namespace {

constexpr int kInf = std::numeric_limits<int>::max();

// 80/10/10 by node, uniformly at random.
Split make_split(Rng& rng, int n) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const int n_train = n * 8 / 10;
  const int n_val = n / 10;
  Split s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<Edge> arcs_of(const std::set<Edge>& undirected) {
  std::vector<Edge> arcs;
  arcs.reserve(undirected.size() * 2);
  for (const auto& [a, b] : undirected) {
    arcs.emplace_back(a, b);
    arcs.emplace_back(b, a);
  }
  std::sort(arcs.begin(), arcs.end());
  return arcs;
}

nlohmann::json split_to_json(const Split& s) {
  return {{"train", s.train}, {"val", s.val}, {"test", s.test}};
}

void attach_meta(DatasetBundle& b) {
  b.graph.meta["split"] = split_to_json(b.split);
  b.graph.meta["generator_config"] = b.generator_config;
  if (!b.ground_truth_paths.empty() || !b.ambiguous_targets.empty()) {
    nlohmann::json paths = nlohmann::json::object();
    for (const auto& [target, path] : b.ground_truth_paths) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& [s, d] : path) arr.push_back({s, d});
      paths[std::to_string(target)] = std::move(arr);
    }
    b.graph.meta["ground_truth_paths"] = std::move(paths);
    b.graph.meta["ambiguous_targets"] = b.ambiguous_targets;
  }
}

}  // namespace

DatasetBundle generate_ba_shapes(std::uint64_t seed, const BaShapesConfig& cfg) {
  if (cfg.n_base < 5) throw ValidationError("ba-shapes: n_base must be >= 5");
  if (cfg.n_motifs < 0) throw ValidationError("ba-shapes: n_motifs must be >= 0");
  Rng rng(seed);

  const int n_nodes = cfg.n_base + 5 * cfg.n_motifs;
  const int n_random =
      cfg.n_random_edges >= 0 ? cfg.n_random_edges : n_nodes / 10;

  std::set<Edge> und;  // canonical (min, max) pairs
  auto add_und = [&](int a, int b) {
    und.insert({std::min(a, b), std::max(a, b)});
  };

  // Barabasi-Albert base, attachment parameter 1: each new node links to
  // one existing node drawn proportionally to degree (repeated-endpoint
  // list trick).
  std::vector<int> endpoints;
  for (int k = 1; k < cfg.n_base; ++k) {
    int target = k == 1 ? 0
                        : endpoints[static_cast<std::size_t>(
                              rng.next_index(endpoints.size()))];
    add_und(k, target);
    endpoints.push_back(k);
    endpoints.push_back(target);
  }

  // House motif: triangle roof on a square. Local roles: node 0 top,
  // 1-2 middle, 3-4 bottom.
  std::vector<int> labels(static_cast<std::size_t>(n_nodes), 0);
  std::set<Edge> gt_und;
  for (int t = 0; t < cfg.n_motifs; ++t) {
    const int base = cfg.n_base + 5 * t;
    const int top = base, m1 = base + 1, m2 = base + 2, b1 = base + 3,
              b2 = base + 4;
    const Edge house[6] = {{top, m1}, {top, m2}, {m1, m2},
                           {m1, b1},  {m2, b2},  {b1, b2}};
    for (const auto& [a, b] : house) {
      add_und(a, b);
      gt_und.insert({a, b});
    }
    labels[static_cast<std::size_t>(top)] = 1;
    labels[static_cast<std::size_t>(m1)] = 2;
    labels[static_cast<std::size_t>(m2)] = 2;
    labels[static_cast<std::size_t>(b1)] = 3;
    labels[static_cast<std::size_t>(b2)] = 3;
    // attachment edge, deliberately not ground truth
    const int motif_node = base + static_cast<int>(rng.next_index(5));
    const int base_node = static_cast<int>(rng.next_index(
        static_cast<std::uint64_t>(cfg.n_base)));
    add_und(motif_node, base_node);
  }

  for (int r = 0; r < n_random; ++r) {
    for (;;) {
      int a = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(n_nodes)));
      int b = static_cast<int>(rng.next_index(static_cast<std::uint64_t>(n_nodes)));
      if (a == b) continue;
      Edge e{std::min(a, b), std::max(a, b)};
      if (und.contains(e)) continue;
      und.insert(e);
      break;
    }
  }

  DatasetBundle bundle;
  bundle.graph.num_nodes = n_nodes;
  bundle.graph.undirected = true;
  bundle.graph.edges = arcs_of(und);
  bundle.graph.labels = labels;
  bundle.graph.ground_truth_edges = arcs_of(gt_und);

  // Degree-based features. A purely constant vector would make every
  // attention layer output identical across nodes, leaving nothing to
  // train on.
  std::vector<int> degree(static_cast<std::size_t>(n_nodes), 0);
  for (const auto& [s, d] : bundle.graph.edges) {
    ++degree[static_cast<std::size_t>(d)];
  }
  const int max_deg = *std::max_element(degree.begin(), degree.end());
  bundle.graph.features.resize(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) {
    bundle.graph.features[static_cast<std::size_t>(i)] = {
        1.0, static_cast<double>(degree[static_cast<std::size_t>(i)]) / max_deg};
  }

  bundle.split = make_split(rng, n_nodes);
  bundle.generator_config = {
      {"dataset", "ba-shapes"}, {"seed", seed},
      {"n_base", cfg.n_base},   {"n_motifs", cfg.n_motifs},
      {"n_random_edges", n_random}, {"m_attach", 1},
      {"features", "degree"},   {"split", "80/10/10"}};
  attach_meta(bundle);
  bundle.graph.validate();
  return bundle;
}

DatasetBundle generate_infection(std::uint64_t seed, const InfectionConfig& cfg) {
  if (cfg.edge_prob <= 0.0 || cfg.edge_prob >= 1.0) {
    throw ValidationError("infection: edge_prob must be in (0, 1)");
  }
  if (cfg.n_infected <= 0 || cfg.n_infected > cfg.n_nodes) {
    throw ValidationError("infection: need 0 < n_infected <= n_nodes");
  }
  if (cfg.max_dist < 1) throw ValidationError("infection: max_dist must be >= 1");
  Rng rng(seed);
  const int n = cfg.n_nodes;

  // Directed Erdos-Renyi backbone: infection spreads along arcs.
  std::vector<Edge> arcs;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && rng.next_double() < cfg.edge_prob) arcs.emplace_back(i, j);
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<int> infected(order.begin(), order.begin() + cfg.n_infected);
  std::sort(infected.begin(), infected.end());
  std::vector<char> is_infected(static_cast<std::size_t>(n), 0);
  for (int v : infected) is_infected[static_cast<std::size_t>(v)] = 1;

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [a, b] : arcs) adj[static_cast<std::size_t>(a)].push_back(b);
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());

  // Multi-source BFS with shortest-path counting; counts saturate since
  // only uniqueness matters.
  std::vector<int> dist(static_cast<std::size_t>(n), kInf);
  std::vector<std::uint64_t> n_paths(static_cast<std::size_t>(n), 0);
  std::vector<int> pred(static_cast<std::size_t>(n), -1);
  std::deque<int> queue;
  for (int v : infected) {
    dist[static_cast<std::size_t>(v)] = 0;
    n_paths[static_cast<std::size_t>(v)] = 1;
    queue.push_back(v);
  }
  constexpr std::uint64_t kCap = 1ULL << 32;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int w : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(w)] == kInf) {
        dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
        n_paths[static_cast<std::size_t>(w)] = n_paths[static_cast<std::size_t>(u)];
        pred[static_cast<std::size_t>(w)] = u;
        queue.push_back(w);
      } else if (dist[static_cast<std::size_t>(w)] ==
                 dist[static_cast<std::size_t>(u)] + 1) {
        n_paths[static_cast<std::size_t>(w)] = std::min(
            kCap, n_paths[static_cast<std::size_t>(w)] +
                      n_paths[static_cast<std::size_t>(u)]);
      }
    }
  }

  DatasetBundle bundle;
  bundle.graph.num_nodes = n;
  bundle.graph.undirected = false;
  std::sort(arcs.begin(), arcs.end());
  bundle.graph.edges = std::move(arcs);

  std::vector<int> labels(static_cast<std::size_t>(n));
  bundle.graph.features.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    labels[static_cast<std::size_t>(v)] =
        dist[static_cast<std::size_t>(v)] == kInf
            ? cfg.max_dist
            : std::min(dist[static_cast<std::size_t>(v)], cfg.max_dist);
    bundle.graph.features[static_cast<std::size_t>(v)] =
        is_infected[static_cast<std::size_t>(v)] ? std::vector<double>{0.0, 1.0}
                                                 : std::vector<double>{1.0, 0.0};
  }
  bundle.graph.labels = labels;

  std::set<Edge> gt_arcs;
  for (int v = 0; v < n; ++v) {
    const int d = dist[static_cast<std::size_t>(v)];
    if (d == kInf || d < 1 || d >= cfg.max_dist) continue;
    if (n_paths[static_cast<std::size_t>(v)] != 1) {
      bundle.ambiguous_targets.push_back(v);
      continue;
    }
    std::vector<Edge> path;
    for (int w = v; pred[static_cast<std::size_t>(w)] >= 0;
         w = pred[static_cast<std::size_t>(w)]) {
      path.emplace_back(pred[static_cast<std::size_t>(w)], w);
    }
    std::reverse(path.begin(), path.end());
    for (const auto& e : path) gt_arcs.insert(e);
    bundle.ground_truth_paths[v] = std::move(path);
  }
  bundle.graph.ground_truth_edges.assign(gt_arcs.begin(), gt_arcs.end());

  bundle.split = make_split(rng, n);
  bundle.generator_config = {
      {"dataset", "infection"},       {"seed", seed},
      {"n_nodes", cfg.n_nodes},       {"edge_prob", cfg.edge_prob},
      {"n_infected", cfg.n_infected}, {"max_dist", cfg.max_dist},
      {"features", "one-hot-infected"}, {"split", "80/10/10"}};
  attach_meta(bundle);
  bundle.graph.validate();
  return bundle;
}

nlohmann::json bundle_to_json(const DatasetBundle& b) {
  DatasetBundle copy = b;
  attach_meta(copy);
  return graph_to_json(copy.graph);
}

DatasetBundle bundle_from_json(const nlohmann::json& j) {
  DatasetBundle b;
  b.graph = graph_from_json(j);
  const auto& meta = b.graph.meta;
  if (!meta.contains("split")) {
    throw ValidationError("bundle schema: missing meta.split");
  }
  b.split.train = meta.at("split").at("train").get<std::vector<int>>();
  b.split.val = meta.at("split").at("val").get<std::vector<int>>();
  b.split.test = meta.at("split").at("test").get<std::vector<int>>();
  if (meta.contains("generator_config")) {
    b.generator_config = meta.at("generator_config");
  }
  if (meta.contains("ground_truth_paths")) {
    for (const auto& [key, arr] : meta.at("ground_truth_paths").items()) {
      std::vector<Edge> path;
      for (const auto& e : arr) path.emplace_back(e[0].get<int>(), e[1].get<int>());
      b.ground_truth_paths[std::stoi(key)] = std::move(path);
    }
  }
  if (meta.contains("ambiguous_targets")) {
    b.ambiguous_targets = meta.at("ambiguous_targets").get<std::vector<int>>();
  }
  std::set<int> seen;
  for (const auto* part : {&b.split.train, &b.split.val, &b.split.test}) {
    for (int v : *part) {
      if (v < 0 || v >= b.graph.num_nodes || !seen.insert(v).second) {
        throw ValidationError("bundle schema: split must cover nodes exactly once");
      }
    }
  }
  if (static_cast<int>(seen.size()) != b.graph.num_nodes) {
    throw ValidationError("bundle schema: split must cover all nodes");
  }
  return b;
}

void save_bundle(const DatasetBundle& b, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write bundle file: " + path.string());
  out << bundle_to_json(b).dump(2) << '\n';
}

DatasetBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open bundle file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed bundle JSON in " + path.string() + ": " +
                          e.what());
  }
  return bundle_from_json(j);
}

}  // namespace gatt
