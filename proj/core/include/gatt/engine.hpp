#pragma once

#include <optional>
#include <vector>

#include "gatt/graph.hpp"
#include "gatt/model.hpp"
#include "gatt/sparse.hpp"

namespace gatt {

// Per-node class logits and softmax probabilities, one row per node.
struct Prediction {
  Dense logits;
  Dense probs;
};

// Per-layer attention matrices with [A(l)]_{j,i} = attention of edge
// (i, j); support is the self-looped edge set, rows sum to 1 over each
// destination's in-neighborhood. averaged[l] is the uniform mean over
// heads and is the canonical matrix consumed by attribution.
struct AttentionStack {
  std::vector<std::vector<SparseMatrix>> per_head;  // [layer][head]
  std::vector<SparseMatrix> averaged;               // [layer]

  int num_layers() const { return static_cast<int>(averaged.size()); }
  int num_heads(int layer) const {
    return per_head.empty() ? 1
                            : static_cast<int>(
                                  per_head[static_cast<std::size_t>(layer)].size());
  }
};

// Builds a stack directly from head-averaged matrices, e.g. for
// hand-constructed fixtures.
AttentionStack make_stack(std::vector<SparseMatrix> averaged);

// Everything the backward pass needs from one forward evaluation.
struct ForwardCache {
  struct Head {
    Dense z;                    // N x F_out, z = input * weight
    std::vector<double> u;      // pre-LeakyReLU logit per edge (CSR order)
    std::vector<double> alpha;  // attention weight per edge (CSR order)
  };
  struct Layer {
    Dense input;       // N x F_in
    std::vector<Head> heads;
    Dense merged_pre;  // N x F_merged, before the activation
  };
  std::vector<Layer> layers;
};

struct ForwardResult {
  Prediction prediction;
  AttentionStack attention;
};

// Deterministic forward pass. The graph must contain all self-loops and
// its feature dimension must match layer 1.
ForwardResult forward(const GatModel& model, const Graph& graph);

// Forward with one directed edge removed from every layer's softmax
// support; the surviving weights at each affected destination
// renormalize. Throws NumericError if some destination loses its entire
// support.
Prediction forward_with_erasure(const GatModel& model, const Graph& graph,
                                const Edge& erased);

AttentionStack extract_attention(const GatModel& model, const Graph& graph);

Prediction softmax_prediction(const Dense& logits);

namespace detail {
// Shared forward core; cache and stack outputs are optional.
Dense forward_logits(const GatModel& model, const Graph& graph,
                     const InAdjacency& adj, const Edge* erased,
                     ForwardCache* cache, AttentionStack* stack);
}  // namespace detail

}  // namespace gatt
