#include "gatt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gatt/errors.hpp"

namespace gatt {

int argmax_class(const double* row, int n) {
  int best = 0;
  for (int c = 1; c < n; ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

double accuracy(const Prediction& pred, const std::vector<int>& labels,
                std::span<const int> subset) {
  if (subset.empty()) return 0.0;
  int correct = 0;
  for (int v : subset) {
    if (argmax_class(pred.probs.row(v), pred.probs.cols) ==
        labels[static_cast<std::size_t>(v)]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(subset.size());
}

namespace {

// grads += x^T * dy
void accumulate_xt_dy(const Dense& x, const Dense& dy, Dense& dw) {
  for (int r = 0; r < x.rows; ++r) {
    const double* xr = x.row(r);
    const double* dyr = dy.row(r);
    for (int k = 0; k < x.cols; ++k) {
      const double xv = xr[k];
      if (xv == 0.0) continue;
      double* dwr = dw.row(k);
      for (int c = 0; c < dy.cols; ++c) dwr[c] += xv * dyr[c];
    }
  }
}

// dx += dy * w^T
void accumulate_dy_wt(const Dense& dy, const Dense& w, Dense& dx) {
  for (int r = 0; r < dy.rows; ++r) {
    const double* dyr = dy.row(r);
    double* dxr = dx.row(r);
    for (int c = 0; c < dy.cols; ++c) {
      const double dv = dyr[c];
      if (dv == 0.0) continue;
      for (int k = 0; k < w.rows; ++k) dxr[k] += dv * w.at(k, c);
    }
  }
}

GatModel zero_like(const GatModel& model) {
  GatModel g = model;
  for (auto& layer : g.layers) {
    for (auto& head : layer.per_head) {
      std::fill(head.weight.data.begin(), head.weight.data.end(), 0.0);
      std::fill(head.att_src.begin(), head.att_src.end(), 0.0);
      std::fill(head.att_dst.begin(), head.att_dst.end(), 0.0);
    }
  }
  return g;
}

double subset_cross_entropy(const Dense& logits, const std::vector<int>& labels,
                            std::span<const int> subset, Dense* dlogits) {
  double loss = 0.0;
  const int c_count = logits.cols;
  for (int v : subset) {
    const double* lr = logits.row(v);
    const double m = *std::max_element(lr, lr + c_count);
    double denom = 0.0;
    for (int c = 0; c < c_count; ++c) denom += std::exp(lr[c] - m);
    const int y = labels[static_cast<std::size_t>(v)];
    if (y < 0 || y >= c_count) {
      throw ValidationError("label out of range for node " + std::to_string(v));
    }
    loss += std::log(denom) - (lr[y] - m);
    if (dlogits) {
      double* dr = dlogits->row(v);
      const double inv = 1.0 / static_cast<double>(subset.size());
      for (int c = 0; c < c_count; ++c) {
        dr[c] = (std::exp(lr[c] - m) / denom - (c == y ? 1.0 : 0.0)) * inv;
      }
    }
  }
  return loss / static_cast<double>(subset.size());
}

double loss_only(const GatModel& model, const Graph& graph,
                 const InAdjacency& adj, std::span<const int> subset,
                 double l2_weight) {
  Dense logits = detail::forward_logits(model, graph, adj, nullptr, nullptr, nullptr);
  double loss = subset_cross_entropy(logits, *graph.labels, subset, nullptr);
  if (l2_weight != 0.0) {
    double sq = 0.0;
    for (double p : model.to_flat()) sq += p * p;
    loss += 0.5 * l2_weight * sq;
  }
  return loss;
}

}  // namespace

std::pair<double, std::vector<double>> loss_and_grads(
    const GatModel& model, const Graph& graph, std::span<const int> node_subset,
    double l2_weight) {
  if (!graph.labels) throw ValidationError("loss_and_grads: graph has no labels");
  if (node_subset.empty()) {
    throw ValidationError("loss_and_grads: empty node subset");
  }
  InAdjacency adj(graph);
  ForwardCache cache;
  Dense logits =
      detail::forward_logits(model, graph, adj, nullptr, &cache, nullptr);
  const int n = graph.num_nodes;

  Dense d_out(n, logits.cols);
  double loss = subset_cross_entropy(logits, *graph.labels, node_subset, &d_out);

  GatModel grads = zero_like(model);
  for (int l = model.num_layers() - 1; l >= 0; --l) {
    const LayerParams& layer = model.layers[static_cast<std::size_t>(l)];
    const ForwardCache::Layer& cl = cache.layers[static_cast<std::size_t>(l)];
    const int fout = layer.head_out_dim();
    const int fin = layer.in_dim();

    // through the activation
    Dense d_pre = d_out;
    if (layer.activation == Activation::Elu) {
      for (std::size_t i = 0; i < d_pre.data.size(); ++i) {
        const double pre = cl.merged_pre.data[i];
        if (pre <= 0.0) d_pre.data[i] *= std::exp(pre);
      }
    }

    Dense d_input(n, fin);
    for (int h = 0; h < layer.heads; ++h) {
      const HeadParams& head = layer.per_head[static_cast<std::size_t>(h)];
      HeadParams& ghead =
          grads.layers[static_cast<std::size_t>(l)].per_head[static_cast<std::size_t>(h)];
      const ForwardCache::Head& ch = cl.heads[static_cast<std::size_t>(h)];

      // gradient w.r.t. this head's aggregated output
      Dense dm(n, fout);
      if (layer.merge == HeadMerge::Concat) {
        for (int r = 0; r < n; ++r) {
          const double* src = d_pre.row(r) + h * fout;
          std::copy(src, src + fout, dm.row(r));
        }
      } else {
        const double inv = 1.0 / layer.heads;
        for (int r = 0; r < n; ++r) {
          const double* src = d_pre.row(r);
          double* dst = dm.row(r);
          for (int c = 0; c < fout; ++c) dst[c] = src[c] * inv;
        }
      }

      Dense dz(n, fout);
      std::vector<double> ds_src(static_cast<std::size_t>(n), 0.0);
      std::vector<double> ds_dst(static_cast<std::size_t>(n), 0.0);
      std::vector<double> dalpha;
      for (int j = 0; j < n; ++j) {
        const auto srcs = adj.in_neighbors(j);
        const std::size_t base =
            static_cast<std::size_t>(adj.offsets[static_cast<std::size_t>(j)]);
        const double* dmj = dm.row(j);
        dalpha.assign(srcs.size(), 0.0);
        double weighted = 0.0;  // sum_i alpha_i * dalpha_i
        for (std::size_t k = 0; k < srcs.size(); ++k) {
          const int i = srcs[k];
          const double a = ch.alpha[base + k];
          const double* zi = ch.z.row(i);
          double da = 0.0;
          for (int c = 0; c < fout; ++c) da += dmj[c] * zi[c];
          dalpha[k] = da;
          weighted += a * da;
          // aggregation path: m_j = sum alpha * z_i
          double* dzi = dz.row(i);
          for (int c = 0; c < fout; ++c) dzi[c] += a * dmj[c];
        }
        // softmax and LeakyReLU jacobians
        for (std::size_t k = 0; k < srcs.size(); ++k) {
          const double a = ch.alpha[base + k];
          const double de = a * (dalpha[k] - weighted);
          const double du =
              de * (ch.u[base + k] > 0.0 ? 1.0 : layer.leaky_slope);
          ds_src[static_cast<std::size_t>(srcs[k])] += du;
          ds_dst[static_cast<std::size_t>(j)] += du;
        }
      }
      // s_src[v] = att_src . z_v and s_dst[v] = att_dst . z_v
      for (int v = 0; v < n; ++v) {
        const double gs = ds_src[static_cast<std::size_t>(v)];
        const double gd = ds_dst[static_cast<std::size_t>(v)];
        if (gs == 0.0 && gd == 0.0) continue;
        const double* zv = ch.z.row(v);
        double* dzv = dz.row(v);
        for (int c = 0; c < fout; ++c) {
          ghead.att_src[static_cast<std::size_t>(c)] += gs * zv[c];
          ghead.att_dst[static_cast<std::size_t>(c)] += gd * zv[c];
          dzv[c] += gs * head.att_src[static_cast<std::size_t>(c)] +
                    gd * head.att_dst[static_cast<std::size_t>(c)];
        }
      }
      accumulate_xt_dy(cl.input, dz, ghead.weight);
      accumulate_dy_wt(dz, head.weight, d_input);
    }
    d_out = std::move(d_input);
  }

  std::vector<double> flat_grads = grads.to_flat();
  if (l2_weight != 0.0) {
    const std::vector<double> params = model.to_flat();
    double sq = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      sq += params[i] * params[i];
      flat_grads[i] += l2_weight * params[i];
    }
    loss += 0.5 * l2_weight * sq;
  }
  return {loss, std::move(flat_grads)};
}

std::pair<GatModel, TrainTrace> train(GatModel model, const DatasetBundle& bundle,
                                      const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ValidationError("train: epochs must be >= 1");
  if (cfg.learning_rate < 0.0) {
    throw ValidationError("train: learning_rate must be non-negative");
  }
  if (!bundle.graph.labels) throw ValidationError("train: bundle has no labels");
  if (bundle.split.train.empty()) {
    throw ValidationError("train: bundle has empty train split");
  }
  const Graph graph = add_self_loops(bundle.graph);
  const std::vector<int>& labels = *graph.labels;

  std::vector<double> params = model.to_flat();
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  TrainTrace trace;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto [loss, grads] = loss_and_grads(model, graph, bundle.split.train,
                                        cfg.l2_weight);
    if (!std::isfinite(loss)) {
      throw NumericError("train: non-finite loss at epoch " +
                         std::to_string(epoch));
    }
    if (cfg.optimizer == Optimizer::Sgd) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= cfg.learning_rate * grads[i];
      }
    } else {
      const double bc1 = 1.0 - std::pow(kBeta1, epoch);
      const double bc2 = 1.0 - std::pow(kBeta2, epoch);
      for (std::size_t i = 0; i < params.size(); ++i) {
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * grads[i];
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * grads[i] * grads[i];
        params[i] -= cfg.learning_rate * (m1[i] / bc1) /
                     (std::sqrt(m2[i] / bc2) + kEps);
      }
    }
    model.from_flat(params);

    ForwardResult fr = forward(model, graph);
    trace.loss.push_back(loss);
    trace.train_acc.push_back(accuracy(fr.prediction, labels, bundle.split.train));
    trace.val_acc.push_back(accuracy(fr.prediction, labels, bundle.split.val));
  }
  return {std::move(model), std::move(trace)};
}

double finite_diff_check(const GatModel& model, const Graph& graph,
                         std::span<const int> node_subset, double l2_weight,
                         double h) {
  auto [loss, analytic] = loss_and_grads(model, graph, node_subset, l2_weight);
  (void)loss;
  InAdjacency adj(graph);
  GatModel probe = model;
  std::vector<double> params = model.to_flat();
  double max_rel = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    probe.from_flat(params);
    const double up = loss_only(probe, graph, adj, node_subset, l2_weight);
    params[i] = saved - h;
    probe.from_flat(params);
    const double down = loss_only(probe, graph, adj, node_subset, l2_weight);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::abs(analytic[i] - numeric) /
                       std::max(1.0, std::abs(analytic[i]) + std::abs(numeric));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace gatt
