#include "gatt/attribution.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>
#include <string_view>

#include "gatt/errors.hpp"
#include "gatt/rng.hpp"

namespace gatt {

std::string method_name(Method m) {
  switch (m) {
    case Method::GAtt: return "GAtt";
    case Method::GAttSim: return "GAttSim";
    case Method::GAttAvg: return "GAttAvg";
    case Method::AvgAtt: return "AvgAtt";
    case Method::Random: return "Random";
  }
  throw ValidationError("unknown method enum value");
}

Method parse_method(const std::string& name) {
  if (name == "gatt" || name == "GAtt") return Method::GAtt;
  if (name == "gatt_sim" || name == "GAttSim") return Method::GAttSim;
  if (name == "gatt_avg" || name == "GAttAvg") return Method::GAttAvg;
  if (name == "avg_att" || name == "AvgAtt") return Method::AvgAtt;
  if (name == "random" || name == "Random") return Method::Random;
  throw ValidationError("unknown attribution method '" + name + "'");
}

namespace {

std::vector<std::vector<int>> out_neighbors(const Graph& g) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(g.num_nodes));
  for (const auto& [s, d] : g.edges) out[static_cast<std::size_t>(s)].push_back(d);
  return out;
}

}  // namespace

std::vector<Flow> enumerate_flows(const Graph& graph, int v, const Edge& edge,
                                  int num_layers) {
  if (v < 0 || v >= graph.num_nodes) {
    throw ValidationError("enumerate_flows: invalid target node");
  }
  const Graph sl = graph.has_all_self_loops() ? graph : add_self_loops(graph);
  std::vector<Flow> flows;
  if (!sl.has_edge(edge)) return flows;
  const auto adj = out_neighbors(sl);

  // DFS over paths edge.dst -> ... -> v with 0..L-1 additional edges
  std::vector<Edge> path{edge};
  auto dfs = [&](auto&& self, int node, int depth) -> void {
    if (node == v) {
      flows.push_back({path, v});
      // a flow may pass through v and continue, so do not return
    }
    if (depth == num_layers) return;
    for (int next : adj[static_cast<std::size_t>(node)]) {
      path.emplace_back(node, next);
      self(self, next, depth + 1);
      path.pop_back();
    }
  };
  dfs(dfs, edge.second, 1);
  return flows;
}

std::vector<double> attention_flow(const AttentionStack& stack, const Flow& flow) {
  const int num_layers = stack.num_layers();
  const int m = flow.length();
  if (m < 1 || m > num_layers) {
    throw ValidationError("attention_flow: flow length exceeds layer count");
  }
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) {
    const auto& [src, dst] = flow.edges[static_cast<std::size_t>(k) - 1];
    const SparseMatrix& a =
        stack.averaged[static_cast<std::size_t>(num_layers - m + k) - 1];
    if (!a.contains(dst, src)) {
      throw ValidationError("attention_flow: flow edge missing from stack");
    }
    values.push_back(a.at(dst, src));
  }
  return values;
}

double gatt_reference(const AttentionStack& stack, const Graph& graph, int v,
                      const Edge& edge) {
  double total = 0.0;
  for (const Flow& flow : enumerate_flows(graph, v, edge, stack.num_layers())) {
    const std::vector<double> values = attention_flow(stack, flow);
    double adjustment = 1.0;
    for (std::size_t k = 1; k < values.size(); ++k) adjustment *= values[k];
    total += adjustment * values.front();
  }
  return total;
}

double gatt_sim(const AttentionStack& stack, const Graph& graph, int v,
                const Edge& edge) {
  double total = 0.0;
  for (const Flow& flow : enumerate_flows(graph, v, edge, stack.num_layers())) {
    total += attention_flow(stack, flow).front();
  }
  return total;
}

double gatt_avg(const AttentionStack& stack, const Graph& graph, int v,
                const Edge& edge) {
  const auto flows = enumerate_flows(graph, v, edge, stack.num_layers());
  if (flows.empty()) return 0.0;
  double total = 0.0;
  for (const Flow& flow : flows) {
    const std::vector<double> values = attention_flow(stack, flow);
    double adjustment = 1.0;
    for (std::size_t k = 1; k < values.size(); ++k) adjustment *= values[k];
    total += adjustment * values.front();
  }
  return total / static_cast<double>(flows.size());
}

double avg_att(const AttentionStack& stack, const Edge& edge) {
  const auto& [src, dst] = edge;
  double sum = 0.0;
  int count = 0;
  if (!stack.per_head.empty()) {
    for (const auto& heads : stack.per_head) {
      for (const auto& a : heads) {
        if (!a.contains(dst, src)) {
          throw ValidationError("avg_att: edge absent from attention support");
        }
        sum += a.at(dst, src);
        ++count;
      }
    }
  } else {
    for (const auto& a : stack.averaged) {
      if (!a.contains(dst, src)) {
        throw ValidationError("avg_att: edge absent from attention support");
      }
      sum += a.at(dst, src);
      ++count;
    }
  }
  return sum / count;
}

std::vector<double> random_attribution(std::uint64_t seed, std::size_t n_edges) {
  Rng rng(seed);
  std::vector<double> scores(n_edges);
  for (double& s : scores) s = rng.next_double();
  return scores;
}

SparseMatrix cumulative_attention(const AttentionStack& stack, int k) {
  const int num_layers = stack.num_layers();
  if (k < 0 || k > num_layers) {
    throw ValidationError("cumulative_attention: k out of range");
  }
  const int n = stack.averaged.front().size();
  SparseMatrix c = SparseMatrix::identity(n);
  for (int step = 0; step < k; ++step) {
    // left-to-right: A(L) A(L-1) ... A(L-k+1)
    c = c.multiply(stack.averaged[static_cast<std::size_t>(num_layers - step) - 1]);
  }
  return c;
}

AttributionContext::AttributionContext(const AttentionStack& stack,
                                       const Graph& self_looped_graph)
    : stack_(stack),
      graph_(self_looped_graph),
      num_layers_(stack.num_layers()) {
  if (num_layers_ < 1) {
    throw ValidationError("AttributionContext: empty attention stack");
  }
  const int n = stack.averaged.front().size();
  if (n != graph_.num_nodes) {
    throw ValidationError("AttributionContext: stack/graph size mismatch");
  }
  cumulative_.push_back(SparseMatrix::identity(n));
  for (int k = 1; k <= num_layers_; ++k) {
    cumulative_.push_back(cumulative_.back().multiply(
        stack.averaged[static_cast<std::size_t>(num_layers_ - k)]));
  }
  SparseMatrix indicator(n);
  for (const auto& [s, d] : graph_.edges) indicator.set(d, s, 1.0);
  counts_.push_back(SparseMatrix::identity(n));
  for (int k = 1; k < num_layers_; ++k) {
    counts_.push_back(counts_.back().multiply(indicator));
  }
}

const SparseMatrix& AttributionContext::cumulative(int k) const {
  if (k < 0 || k >= static_cast<int>(cumulative_.size())) {
    throw ValidationError("cumulative: k out of range");
  }
  return cumulative_[static_cast<std::size_t>(k)];
}

AttributionContext::EdgeScores AttributionContext::layer_sum_scores(
    int v, const std::vector<SparseMatrix>& upstream) const {
  std::map<Edge, double> acc;
  for (int m = 1; m <= num_layers_; ++m) {
    const SparseMatrix& up = upstream[static_cast<std::size_t>(num_layers_ - m)];
    const SparseMatrix& a = stack_.averaged[static_cast<std::size_t>(m) - 1];
    for (const auto& cj : up.row(v)) {
      if (cj.value == 0.0) continue;
      for (const auto& e : a.row(cj.col)) {
        acc[{e.col, e.row}] += cj.value * e.value;
      }
    }
  }
  EdgeScores scores;
  for (const Edge& e : k_hop_edge_set(graph_, v, num_layers_)) {
    auto it = acc.find(e);
    scores.emplace_back(e, it == acc.end() ? 0.0 : it->second);
  }
  return scores;
}

AttributionContext::EdgeScores AttributionContext::gatt_scores(int v) const {
  return layer_sum_scores(v, cumulative_);
}

AttributionContext::EdgeScores AttributionContext::gatt_sim_scores(int v) const {
  return layer_sum_scores(v, counts_);
}

AttributionContext::EdgeScores AttributionContext::gatt_avg_scores(int v) const {
  EdgeScores scores = gatt_scores(v);
  // |flow set| for edge (i, j) = sum_m (# length-(L-m) paths j -> v)
  for (auto& [edge, score] : scores) {
    double flow_count = 0.0;
    for (int m = 1; m <= num_layers_; ++m) {
      flow_count +=
          counts_[static_cast<std::size_t>(num_layers_ - m)].at(v, edge.second);
    }
    score = flow_count > 0.0 ? score / flow_count : 0.0;
  }
  return scores;
}

AttributionContext::EdgeScores AttributionContext::avg_att_scores(int v) const {
  EdgeScores scores;
  for (const Edge& e : k_hop_edge_set(graph_, v, num_layers_)) {
    scores.emplace_back(e, avg_att(stack_, e));
  }
  return scores;
}

AttributionContext::EdgeScores AttributionContext::random_scores(
    int v, std::uint64_t seed) const {
  const std::vector<Edge> scope = k_hop_edge_set(graph_, v, num_layers_);
  const std::vector<double> values = random_attribution(seed, scope.size());
  EdgeScores scores;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    scores.emplace_back(scope[i], values[i]);
  }
  return scores;
}

AttributionContext::EdgeScores AttributionContext::scores(
    int v, Method method, std::uint64_t random_seed) const {
  switch (method) {
    case Method::GAtt: return gatt_scores(v);
    case Method::GAttSim: return gatt_sim_scores(v);
    case Method::GAttAvg: return gatt_avg_scores(v);
    case Method::AvgAtt: return avg_att_scores(v);
    case Method::Random: return random_scores(v, random_seed);
  }
  throw ValidationError("unknown method enum value");
}

void AttributionTable::write_csv(std::ostream& out) const {
  std::vector<AttributionRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const AttributionRow& a, const AttributionRow& b) {
              if (a.target != b.target) return a.target < b.target;
              if (a.edge != b.edge) return a.edge < b.edge;
              return static_cast<int>(a.method) < static_cast<int>(b.method);
            });
  out << "target,src,dst,method,score\n";
  char buf[32];
  for (const auto& r : sorted) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), r.score);
    out << r.target << ',' << r.edge.first << ',' << r.edge.second << ','
        << method_name(r.method) << ',' << std::string_view(buf, ptr) << '\n';
  }
}

}  // namespace gatt
