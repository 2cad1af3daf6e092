#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gatt/dataset.hpp"
#include "gatt/engine.hpp"
#include "gatt/model.hpp"

namespace gatt {

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.01;
  Optimizer optimizer = Optimizer::Adam;
  double l2_weight = 5e-4;
  std::uint64_t seed = 0;
  double init_scale = 1.0;
};

struct TrainTrace {
  std::vector<double> loss;
  std::vector<double> train_acc;
  std::vector<double> val_acc;
};

// Mean cross-entropy over the labeled subset plus l2_weight/2 * ||params||^2,
// with exact analytic gradients in model.to_flat() order. The graph must be
// self-looped.
std::pair<double, std::vector<double>> loss_and_grads(
    const GatModel& model, const Graph& graph, std::span<const int> node_subset,
    double l2_weight);

// Full-batch training on the bundle's train split. Deterministic per
// (model, bundle, config).
std::pair<GatModel, TrainTrace> train(GatModel model, const DatasetBundle& bundle,
                                      const TrainConfig& cfg);

// Max relative error between analytic gradients and central finite
// differences (step h), parameter by parameter. Meant for small graphs.
double finite_diff_check(const GatModel& model, const Graph& graph,
                         std::span<const int> node_subset, double l2_weight = 0.0,
                         double h = 1e-5);

// Argmax class per node, ties broken by lowest index.
int argmax_class(const double* row, int n);
double accuracy(const Prediction& pred, const std::vector<int>& labels,
                std::span<const int> subset);

}  // namespace gatt
