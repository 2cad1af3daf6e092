#include "gatt/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gatt/errors.hpp"

namespace gatt {

AttentionStack make_stack(std::vector<SparseMatrix> averaged) {
  AttentionStack stack;
  stack.per_head.reserve(averaged.size());
  for (const auto& a : averaged) stack.per_head.push_back({a});
  stack.averaged = std::move(averaged);
  return stack;
}

namespace {

double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// out = x * w, (N x Fin) * (Fin x Fout)
Dense matmul(const Dense& x, const Dense& w) {
  Dense out(x.rows, w.cols);
  for (int r = 0; r < x.rows; ++r) {
    const double* xr = x.row(r);
    double* or_ = out.row(r);
    for (int k = 0; k < x.cols; ++k) {
      const double xv = xr[k];
      if (xv == 0.0) continue;
      const double* wr = w.row(k);
      for (int c = 0; c < w.cols; ++c) or_[c] += xv * wr[c];
    }
  }
  return out;
}

}  // namespace

namespace detail {

Dense forward_logits(const GatModel& model, const Graph& graph,
                     const InAdjacency& adj, const Edge* erased,
                     ForwardCache* cache, AttentionStack* stack) {
  model.validate();
  if (!graph.has_all_self_loops()) {
    throw ValidationError("forward: graph must contain all self-loops");
  }
  if (graph.feature_dim() != model.input_dim()) {
    throw ValidationError("forward: feature dimension " +
                          std::to_string(graph.feature_dim()) +
                          " does not match layer 1 input " +
                          std::to_string(model.input_dim()));
  }
  if (erased && !graph.has_edge(*erased)) {
    throw ValidationError("forward_with_erasure: edge not in graph");
  }
  const int n = graph.num_nodes;
  const std::size_t n_edges = adj.sources.size();

  Dense x(n, graph.feature_dim());
  for (int v = 0; v < n; ++v) {
    std::copy(graph.features[static_cast<std::size_t>(v)].begin(),
              graph.features[static_cast<std::size_t>(v)].end(), x.row(v));
  }
  if (cache) cache->layers.resize(model.layers.size());
  if (stack) {
    stack->per_head.assign(model.layers.size(), {});
    stack->averaged.assign(model.layers.size(), SparseMatrix(n));
  }

  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const LayerParams& layer = model.layers[l];
    const int fout = layer.head_out_dim();
    Dense merged(n, layer.out_dim());
    ForwardCache::Layer* cl = cache ? &cache->layers[l] : nullptr;
    if (cl) {
      cl->input = x;
      cl->heads.resize(static_cast<std::size_t>(layer.heads));
    }
    for (int h = 0; h < layer.heads; ++h) {
      const HeadParams& head = layer.per_head[static_cast<std::size_t>(h)];
      Dense z = matmul(x, head.weight);
      std::vector<double> s_src(static_cast<std::size_t>(n));
      std::vector<double> s_dst(static_cast<std::size_t>(n));
      for (int v = 0; v < n; ++v) {
        s_src[static_cast<std::size_t>(v)] = dot(z.row(v), head.att_src.data(), fout);
        s_dst[static_cast<std::size_t>(v)] = dot(z.row(v), head.att_dst.data(), fout);
      }
      std::vector<double> u(n_edges, 0.0);
      std::vector<double> alpha(n_edges, 0.0);
      for (int j = 0; j < n; ++j) {
        const auto srcs = adj.in_neighbors(j);
        const std::size_t base =
            static_cast<std::size_t>(adj.offsets[static_cast<std::size_t>(j)]);
        double max_u = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < srcs.size(); ++k) {
          const int i = srcs[k];
          double ui = s_src[static_cast<std::size_t>(i)] +
                      s_dst[static_cast<std::size_t>(j)];
          ui = ui > 0.0 ? ui : layer.leaky_slope * ui;
          if (!std::isfinite(ui)) {
            throw NumericError("forward: non-finite attention logit");
          }
          u[base + k] = ui;
          if (erased && i == erased->first && j == erased->second) continue;
          max_u = std::max(max_u, ui);
        }
        if (max_u == -std::numeric_limits<double>::infinity()) {
          throw NumericError("degenerate softmax support at node " +
                             std::to_string(j));
        }
        double denom = 0.0;
        for (std::size_t k = 0; k < srcs.size(); ++k) {
          if (erased && srcs[k] == erased->first && j == erased->second) continue;
          denom += std::exp(u[base + k] - max_u);
        }
        for (std::size_t k = 0; k < srcs.size(); ++k) {
          const int i = srcs[k];
          if (erased && i == erased->first && j == erased->second) {
            alpha[base + k] = 0.0;
            continue;
          }
          alpha[base + k] = std::exp(u[base + k] - max_u) / denom;
        }
        // aggregate into this destination's merged slot
        double* out_row = merged.row(j);
        const int offset = layer.merge == HeadMerge::Concat ? h * fout : 0;
        const double scale =
            layer.merge == HeadMerge::Average ? 1.0 / layer.heads : 1.0;
        for (std::size_t k = 0; k < srcs.size(); ++k) {
          const double a = alpha[base + k];
          if (a == 0.0) continue;
          const double* zi = z.row(srcs[k]);
          for (int c = 0; c < fout; ++c) out_row[offset + c] += scale * a * zi[c];
        }
      }
      if (stack) {
        SparseMatrix a_mat(n);
        for (int j = 0; j < n; ++j) {
          const auto srcs = adj.in_neighbors(j);
          const std::size_t base =
              static_cast<std::size_t>(adj.offsets[static_cast<std::size_t>(j)]);
          for (std::size_t k = 0; k < srcs.size(); ++k) {
            a_mat.set(j, srcs[k], alpha[base + k]);
          }
        }
        stack->per_head[l].push_back(std::move(a_mat));
      }
      if (cl) {
        auto& ch = cl->heads[static_cast<std::size_t>(h)];
        ch.z = std::move(z);
        ch.u = std::move(u);
        ch.alpha = std::move(alpha);
      }
    }
    if (stack) {
      SparseMatrix avg(n);
      const auto& heads = stack->per_head[l];
      for (const auto& e : heads.front().entries()) {
        double sum = 0.0;
        for (const auto& hm : heads) sum += hm.at(e.row, e.col);
        avg.set(e.row, e.col, sum / static_cast<double>(heads.size()));
      }
      stack->averaged[l] = std::move(avg);
    }
    if (cl) cl->merged_pre = merged;
    if (layer.activation == Activation::Elu) {
      for (double& v : merged.data) v = v > 0.0 ? v : std::expm1(v);
    }
    x = std::move(merged);
  }
  return x;
}

}  // namespace detail

Prediction softmax_prediction(const Dense& logits) {
  Prediction p;
  p.logits = logits;
  p.probs = Dense(logits.rows, logits.cols);
  for (int r = 0; r < logits.rows; ++r) {
    const double* lr = logits.row(r);
    double* pr = p.probs.row(r);
    const double m = *std::max_element(lr, lr + logits.cols);
    double denom = 0.0;
    for (int c = 0; c < logits.cols; ++c) denom += std::exp(lr[c] - m);
    for (int c = 0; c < logits.cols; ++c) pr[c] = std::exp(lr[c] - m) / denom;
  }
  return p;
}

ForwardResult forward(const GatModel& model, const Graph& graph) {
  InAdjacency adj(graph);
  ForwardResult result;
  Dense logits = detail::forward_logits(model, graph, adj, nullptr, nullptr,
                                        &result.attention);
  result.prediction = softmax_prediction(logits);
  return result;
}

Prediction forward_with_erasure(const GatModel& model, const Graph& graph,
                                const Edge& erased) {
  InAdjacency adj(graph);
  Dense logits =
      detail::forward_logits(model, graph, adj, &erased, nullptr, nullptr);
  return softmax_prediction(logits);
}

AttentionStack extract_attention(const GatModel& model, const Graph& graph) {
  InAdjacency adj(graph);
  AttentionStack stack;
  detail::forward_logits(model, graph, adj, nullptr, nullptr, &stack);
  return stack;
}

}  // namespace gatt
