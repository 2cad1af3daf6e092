#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "gatt/attribution.hpp"
#include "gatt/dataset.hpp"
#include "gatt/engine.hpp"
#include "gatt/metrics.hpp"
#include "gatt/model.hpp"

namespace gatt {

// One counterfactual erasure of one directed edge for one target.
struct ErasureOutcome {
  int target = 0;
  Edge edge;
  double delta_pc = 0.0;
  double delta_ne = 0.0;
  bool prediction_changed = false;
};

struct CorrelationSet {
  std::optional<double> pearson;
  std::optional<double> kendall;
  std::optional<double> spearman;
};

struct MethodMetrics {
  CorrelationSet delta_pc;
  CorrelationSet delta_ne;
  std::optional<double> delta_p_auroc;
  std::optional<double> accuracy_auroc;
};

// One raw pooled record: a method's score for an edge next to the
// erasure response at that edge.
struct RawRecord {
  int target = 0;
  Edge edge;
  Method method = Method::GAtt;
  double score = 0.0;
  double delta_pc = 0.0;
  double delta_ne = 0.0;
  bool changed = false;
};

struct Report {
  nlohmann::json config = nlohmann::json::object();
  std::map<Method, MethodMetrics> methods;
  int skipped_degenerate_erasures = 0;
  int skipped_targets_without_positives = 0;
  std::vector<RawRecord> raw;

  nlohmann::json to_json() const;
  void write_raw_csv(std::ostream& out) const;
  // Summary table, one row per method.
  void print_summary(std::ostream& out) const;
};

struct FaithfulnessOptions {
  std::vector<Method> methods = {Method::GAtt, Method::AvgAtt, Method::Random};
  int n_targets = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  bool keep_raw = false;
};

// Attention-erasure faithfulness sweep: for each sampled target, score
// every in-scope edge with every method, erase the edge, record the
// response, then pool (target, edge) pairs per method. Degenerate
// erasures (a destination's only in-edge) are skipped and counted.
// Deterministic for fixed (model, bundle, options), any thread count.
Report run_faithfulness(const GatModel& model, const DatasetBundle& bundle,
                        const FaithfulnessOptions& options);

// Ground-truth explanation accuracy: pooled AUROC per method over
// (target, edge) pairs, positives = ground-truth membership. Self-loop
// edges stay in the pool but are never positives.
std::map<Method, std::optional<double>> run_accuracy(const AttributionTable& table,
                                                     const DatasetBundle& bundle,
                                                     int* skipped_targets = nullptr);

// Targets evaluable for accuracy: unique-path targets (Infection) or
// motif-labeled nodes (ground-truth edge sets without per-target paths).
std::vector<int> accuracy_targets(const DatasetBundle& bundle);

// Whether an edge counts as ground truth for a given target.
bool is_ground_truth(const DatasetBundle& bundle, int target, const Edge& edge);

// Builds the attribution table for the given targets and methods.
// Random scores use a per-target stream derived from seed.
AttributionTable attribute_targets(const AttributionContext& ctx,
                                   const std::vector<int>& targets,
                                   const std::vector<Method>& methods,
                                   std::uint64_t seed);

}  // namespace gatt
