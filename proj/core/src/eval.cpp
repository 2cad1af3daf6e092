#include "gatt/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <set>
#include <string_view>
#include <thread>

#include "gatt/errors.hpp"
#include "gatt/rng.hpp"
#include "gatt/trainer.hpp"

namespace gatt {

namespace {

nlohmann::json metric_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

nlohmann::json correlations_json(const CorrelationSet& c) {
  return {{"pearson", metric_json(c.pearson)},
          {"kendall", metric_json(c.kendall)},
          {"spearman", metric_json(c.spearman)}};
}

std::string fmt_metric(const std::optional<double>& v) {
  if (!v) return "degenerate";
  char buf[32];
  const int written = std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return std::string(buf, static_cast<std::size_t>(written));
}

}  // namespace

nlohmann::json Report::to_json() const {
  nlohmann::json jm = nlohmann::json::object();
  for (const auto& [method, metrics] : methods) {
    jm[method_name(method)] = {
        {"delta_pc", correlations_json(metrics.delta_pc)},
        {"delta_ne", correlations_json(metrics.delta_ne)},
        {"delta_p_auroc", metric_json(metrics.delta_p_auroc)},
        {"accuracy_auroc", metric_json(metrics.accuracy_auroc)}};
  }
  return {{"config", config},
          {"methods", std::move(jm)},
          {"skipped",
           {{"degenerate_erasures", skipped_degenerate_erasures},
            {"targets_without_positives", skipped_targets_without_positives}}}};
}

void Report::write_raw_csv(std::ostream& out) const {
  out << "target,src,dst,method,score,delta_pc,delta_ne,changed\n";
  char buf[32];
  auto num = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  for (const auto& r : raw) {
    out << r.target << ',' << r.edge.first << ',' << r.edge.second << ','
        << method_name(r.method) << ',' << num(r.score) << ','
        << num(r.delta_pc) << ',' << num(r.delta_ne) << ','
        << (r.changed ? 1 : 0) << '\n';
  }
}

void Report::print_summary(std::ostream& out) const {
  bool any_faith = false, any_acc = false;
  for (const auto& [method, m] : methods) {
    any_faith = any_faith || m.delta_pc.pearson || m.delta_pc.kendall ||
                m.delta_pc.spearman || m.delta_ne.pearson ||
                m.delta_ne.kendall || m.delta_ne.spearman || m.delta_p_auroc;
    any_acc = any_acc || m.accuracy_auroc;
  }
  const bool show_faith = any_faith || !any_acc;
  out << std::left << std::setw(10) << "Method";
  if (show_faith) {
    out << std::setw(38) << "dPC (pearson/kendall/spearman)" << std::setw(38)
        << "dNE (pearson/kendall/spearman)" << std::setw(12) << "dP AUROC";
  }
  if (any_acc) out << "Acc AUROC";
  out << '\n';
  for (const auto& [method, m] : methods) {
    out << std::left << std::setw(10) << method_name(method);
    if (show_faith) {
      const std::string dpc = fmt_metric(m.delta_pc.pearson) + " / " +
                              fmt_metric(m.delta_pc.kendall) + " / " +
                              fmt_metric(m.delta_pc.spearman);
      const std::string dne = fmt_metric(m.delta_ne.pearson) + " / " +
                              fmt_metric(m.delta_ne.kendall) + " / " +
                              fmt_metric(m.delta_ne.spearman);
      out << std::setw(38) << dpc << std::setw(38) << dne << std::setw(12)
          << fmt_metric(m.delta_p_auroc);
    }
    if (any_acc) out << fmt_metric(m.accuracy_auroc);
    out << '\n';
  }
}

std::vector<int> accuracy_targets(const DatasetBundle& bundle) {
  std::vector<int> targets;
  if (!bundle.ground_truth_paths.empty()) {
    for (const auto& [target, path] : bundle.ground_truth_paths) {
      targets.push_back(target);
    }
    return targets;
  }
  if (!bundle.graph.ground_truth_edges.empty() && bundle.graph.labels) {
    for (int v = 0; v < bundle.graph.num_nodes; ++v) {
      if ((*bundle.graph.labels)[static_cast<std::size_t>(v)] > 0) {
        targets.push_back(v);
      }
    }
  }
  return targets;
}

bool is_ground_truth(const DatasetBundle& bundle, int target, const Edge& edge) {
  if (!bundle.ground_truth_paths.empty()) {
    auto it = bundle.ground_truth_paths.find(target);
    if (it == bundle.ground_truth_paths.end()) return false;
    return std::find(it->second.begin(), it->second.end(), edge) !=
           it->second.end();
  }
  return std::binary_search(bundle.graph.ground_truth_edges.begin(),
                            bundle.graph.ground_truth_edges.end(), edge);
}

AttributionTable attribute_targets(const AttributionContext& ctx,
                                   const std::vector<int>& targets,
                                   const std::vector<Method>& methods,
                                   std::uint64_t seed) {
  AttributionTable table;
  for (int v : targets) {
    for (Method method : methods) {
      const std::uint64_t stream =
          Rng::derive(seed, static_cast<std::uint64_t>(v));
      for (const auto& [edge, score] : ctx.scores(v, method, stream)) {
        table.rows.push_back({v, edge, method, score});
      }
    }
  }
  return table;
}

namespace {

struct TargetSweep {
  std::vector<Edge> edges;  // surviving scope edges
  std::vector<double> dpc;
  std::vector<double> dne;
  std::vector<bool> changed;
  std::map<Method, std::vector<double>> scores;  // aligned with edges
  int skipped = 0;
};

TargetSweep sweep_target(const GatModel& model, const Graph& graph,
                         const AttributionContext& ctx, const Prediction& base,
                         int target, const std::vector<Method>& methods,
                         std::uint64_t seed) {
  TargetSweep result;
  const std::vector<Edge> scope =
      k_hop_edge_set(graph, target, model.num_layers());
  const std::span<const double> p(base.probs.row(target),
                                  static_cast<std::size_t>(base.probs.cols));

  std::map<Method, AttributionContext::EdgeScores> all_scores;
  for (Method method : methods) {
    all_scores[method] = ctx.scores(
        target, method, Rng::derive(seed, static_cast<std::uint64_t>(target)));
  }
  for (Method method : methods) result.scores[method] = {};

  for (std::size_t idx = 0; idx < scope.size(); ++idx) {
    const Edge& edge = scope[idx];
    Prediction erased;
    try {
      erased = forward_with_erasure(model, graph, edge);
    } catch (const NumericError&) {
      ++result.skipped;  // a destination's only in-edge
      continue;
    }
    const std::span<const double> q(erased.probs.row(target),
                                    static_cast<std::size_t>(erased.probs.cols));
    result.edges.push_back(edge);
    result.dpc.push_back(delta_pc(p, q));
    result.dne.push_back(delta_ne(p, q));
    result.changed.push_back(delta_p(p, q));
    for (Method method : methods) {
      result.scores[method].push_back(all_scores[method][idx].second);
    }
  }
  return result;
}

}  // namespace

Report run_faithfulness(const GatModel& model, const DatasetBundle& bundle,
                        const FaithfulnessOptions& options) {
  if (options.n_targets < 1) {
    throw ValidationError("run_faithfulness: n_targets must be >= 1");
  }
  const Graph graph = add_self_loops(bundle.graph);
  const ForwardResult base = forward(model, graph);
  const AttributionContext ctx(base.attention, graph);

  std::vector<int> targets(static_cast<std::size_t>(graph.num_nodes));
  std::iota(targets.begin(), targets.end(), 0);
  Rng rng(options.seed);
  rng.shuffle(targets);
  const int n_targets = std::min(options.n_targets, graph.num_nodes);
  targets.resize(static_cast<std::size_t>(n_targets));
  std::sort(targets.begin(), targets.end());

  std::vector<TargetSweep> sweeps(targets.size());
  const int n_workers =
      std::max(1, std::min<int>(options.threads,
                                static_cast<int>(targets.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= targets.size()) break;
      sweeps[i] = sweep_target(model, graph, ctx, base.prediction, targets[i],
                               options.methods, options.seed);
    }
  };
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  Report report;
  report.config = {{"seed", options.seed},
                   {"n_targets", n_targets},
                   {"threads", options.threads},
                   {"num_layers", model.num_layers()}};
  nlohmann::json jm = nlohmann::json::array();
  for (Method m : options.methods) jm.push_back(method_name(m));
  report.config["methods"] = std::move(jm);

  // pool in fixed target order so the report is worker-count independent
  std::map<Method, std::vector<double>> pooled_scores;
  std::vector<double> pooled_dpc, pooled_dne;
  std::vector<bool> pooled_changed;
  for (std::size_t i = 0; i < sweeps.size(); ++i) {
    const TargetSweep& s = sweeps[i];
    report.skipped_degenerate_erasures += s.skipped;
    pooled_dpc.insert(pooled_dpc.end(), s.dpc.begin(), s.dpc.end());
    pooled_dne.insert(pooled_dne.end(), s.dne.begin(), s.dne.end());
    pooled_changed.insert(pooled_changed.end(), s.changed.begin(),
                          s.changed.end());
    for (Method method : options.methods) {
      auto& dst = pooled_scores[method];
      const auto& src = s.scores.at(method);
      dst.insert(dst.end(), src.begin(), src.end());
      if (options.keep_raw) {
        for (std::size_t k = 0; k < s.edges.size(); ++k) {
          report.raw.push_back({targets[i], s.edges[k], method, src[k],
                                s.dpc[k], s.dne[k],
                                static_cast<bool>(s.changed[k])});
        }
      }
    }
  }

  for (Method method : options.methods) {
    MethodMetrics metrics;
    const auto& x = pooled_scores[method];
    if (x.size() >= 2) {
      metrics.delta_pc.pearson = pearson(x, pooled_dpc);
      metrics.delta_pc.kendall = kendall(x, pooled_dpc);
      metrics.delta_pc.spearman = spearman(x, pooled_dpc);
      metrics.delta_ne.pearson = pearson(x, pooled_dne);
      metrics.delta_ne.kendall = kendall(x, pooled_dne);
      metrics.delta_ne.spearman = spearman(x, pooled_dne);
      metrics.delta_p_auroc = auroc(x, pooled_changed);
    }
    report.methods[method] = metrics;
  }
  return report;
}

std::map<Method, std::optional<double>> run_accuracy(const AttributionTable& table,
                                                     const DatasetBundle& bundle,
                                                     int* skipped_targets) {
  if (bundle.graph.ground_truth_edges.empty() &&
      bundle.ground_truth_paths.empty()) {
    throw ValidationError("run_accuracy: bundle has no ground truth");
  }
  // group rows per (method, target)
  std::map<Method, std::map<int, std::vector<const AttributionRow*>>> grouped;
  std::set<int> all_targets;
  for (const auto& row : table.rows) {
    grouped[row.method][row.target].push_back(&row);
    all_targets.insert(row.target);
  }
  // a target is evaluable only if its scope contains a positive edge
  std::set<int> evaluable;
  int skipped = 0;
  for (int target : all_targets) {
    bool has_positive = false;
    const auto& first_method = grouped.begin()->second;
    auto it = first_method.find(target);
    if (it != first_method.end()) {
      for (const AttributionRow* row : it->second) {
        if (is_ground_truth(bundle, target, row->edge)) {
          has_positive = true;
          break;
        }
      }
    }
    if (has_positive) {
      evaluable.insert(target);
    } else {
      ++skipped;
    }
  }
  if (skipped_targets) *skipped_targets = skipped;

  std::map<Method, std::optional<double>> result;
  for (const auto& [method, per_target] : grouped) {
    std::vector<double> scores;
    std::vector<bool> labels;
    for (const auto& [target, rows] : per_target) {
      if (!evaluable.contains(target)) continue;
      for (const AttributionRow* row : rows) {
        scores.push_back(row->score);
        labels.push_back(is_ground_truth(bundle, target, row->edge));
      }
    }
    result[method] = scores.empty() ? std::nullopt : auroc(scores, labels);
  }
  return result;
}

}  // namespace gatt
