#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gatt/engine.hpp"
#include "gatt/graph.hpp"
#include "gatt/sparse.hpp"

namespace gatt {

enum class Method { GAtt, GAttSim, GAttAvg, AvgAtt, Random };

std::string method_name(Method m);
Method parse_method(const std::string& name);
inline constexpr Method kAllMethods[] = {Method::GAtt, Method::GAttSim,
                                         Method::GAttAvg, Method::AvgAtt,
                                         Method::Random};

// A path of m <= L edges inside the depth-L computation tree, starting at
// the queried edge and ending at the target. Distinct tree occurrences of
// the same graph edge are distinct flows.
struct Flow {
  std::vector<Edge> edges;
  int target = 0;

  int length() const { return static_cast<int>(edges.size()); }
};

// All flows of length 1..L that start with `edge` and terminate at v in
// the self-looped graph. Exponential in L; meant as the reference path.
std::vector<Flow> enumerate_flows(const Graph& graph, int v, const Edge& edge,
                                  int num_layers);

// Layer-indexed attention values along a flow: position k reads layer
// L - m + k. Uses the head-averaged matrices.
std::vector<double> attention_flow(const AttentionStack& stack, const Flow& flow);

// Flow-enumeration evaluation of the edge attribution: the sum over all
// flows of the first edge's attention rescaled by the product of the
// downstream attention values.
double gatt_reference(const AttentionStack& stack, const Graph& graph, int v,
                      const Edge& edge);

// Ablation without the downstream product: plain sum of first-edge
// attention over all flows.
double gatt_sim(const AttentionStack& stack, const Graph& graph, int v,
                const Edge& edge);

// Ablation dividing the attribution by the total flow count (0 when the
// flow set is empty).
double gatt_avg(const AttentionStack& stack, const Graph& graph, int v,
                const Edge& edge);

// Mean of the edge's attention over all layers and heads;
// target-independent baseline.
double avg_att(const AttentionStack& stack, const Edge& edge);

// Seeded i.i.d. uniform [0,1) scores.
std::vector<double> random_attribution(std::uint64_t seed, std::size_t n_edges);

// Cumulative attention product: identity for k = 0, else
// A(L) A(L-1) ... A(L-k+1).
SparseMatrix cumulative_attention(const AttentionStack& stack, int k);

// Matrix-path attribution over one stack: the cumulative products (and
// the flow-count powers used by the ablations) are computed once and
// reused across targets. The stack and graph must outlive the context.
class AttributionContext {
 public:
  AttributionContext(const AttentionStack& stack, const Graph& self_looped_graph);

  int num_layers() const { return num_layers_; }
  const SparseMatrix& cumulative(int k) const;

  using EdgeScores = std::vector<std::pair<Edge, double>>;

  // Scores over k_hop_edge_set(graph, v, L), sorted by edge.
  EdgeScores gatt_scores(int v) const;
  EdgeScores gatt_sim_scores(int v) const;
  EdgeScores gatt_avg_scores(int v) const;
  EdgeScores avg_att_scores(int v) const;
  EdgeScores random_scores(int v, std::uint64_t seed) const;

  EdgeScores scores(int v, Method method, std::uint64_t random_seed = 0) const;

 private:
  EdgeScores layer_sum_scores(int v, const std::vector<SparseMatrix>& upstream) const;

  const AttentionStack& stack_;
  const Graph& graph_;
  int num_layers_;
  std::vector<SparseMatrix> cumulative_;  // C_L(0..L)
  std::vector<SparseMatrix> counts_;      // T^0..T^(L-1), T = edge indicator
};

struct AttributionRow {
  int target = 0;
  Edge edge;
  Method method = Method::GAtt;
  double score = 0.0;
};

struct AttributionTable {
  std::vector<AttributionRow> rows;

  // Sorts rows by (target, edge, method) and writes the canonical CSV
  // with header target,src,dst,method,score.
  void write_csv(std::ostream& out) const;
};

}  // namespace gatt
