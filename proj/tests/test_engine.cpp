#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gatt/engine.hpp"
#include "gatt/errors.hpp"
#include "gatt/model.hpp"
#include "gatt/rng.hpp"

using namespace gatt;

namespace {

Graph make_graph(int n, std::vector<Edge> edges, int feat_dim, std::uint64_t seed) {
  Graph g;
  g.num_nodes = n;
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  Rng rng(seed);
  g.features.resize(static_cast<std::size_t>(n));
  for (auto& f : g.features) {
    f.resize(static_cast<std::size_t>(feat_dim));
    for (auto& v : f) v = rng.next_double(-1.0, 1.0);
  }
  return add_self_loops(g);
}

// 6 nodes, enough structure for two message-passing layers
Graph fixture_graph(std::uint64_t seed = 99) {
  return make_graph(6,
                    {{0, 1}, {1, 0}, {1, 2}, {2, 3}, {3, 4}, {4, 2}, {5, 0}, {0, 5}},
                    3, seed);
}

}  // namespace

TEST_CASE("attention rows are stochastic over each destination") {
  const Graph g = fixture_graph();
  const GatModel model = init_model(4, {3, 4, 4, 2}, {2, 2, 1});
  const AttentionStack stack = extract_attention(model, g);
  REQUIRE(stack.num_layers() == 3);
  for (const auto& layer : stack.averaged) {
    for (int j = 0; j < g.num_nodes; ++j) {
      CHECK(layer.row_sum(j) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  for (const auto& heads : stack.per_head) {
    for (const auto& h : heads) {
      for (int j = 0; j < g.num_nodes; ++j) {
        CHECK(h.row_sum(j) == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("singleton graph gets attention exactly 1") {
  const Graph g = make_graph(1, {}, 2, 1);
  const GatModel model = init_model(2, {2, 3}, {1});
  const ForwardResult r = forward(model, g);
  CHECK(r.attention.averaged[0].at(0, 0) == 1.0);
  double total = 0.0;
  for (int c = 0; c < 3; ++c) total += r.prediction.probs.at(0, c);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single layer forward matches a hand computation") {
  // two nodes, scalar features, edges: self-loops plus 1 -> 0
  Graph g;
  g.num_nodes = 2;
  g.edges = {{1, 0}};
  g.features = {{1.0}, {2.0}};
  g = add_self_loops(g);

  GatModel model;
  LayerParams layer;
  layer.heads = 1;
  layer.merge = HeadMerge::Average;
  layer.activation = Activation::Identity;
  HeadParams head;
  head.weight = Dense(1, 2);
  head.weight.at(0, 0) = 1.0;
  head.weight.at(0, 1) = -1.0;
  head.att_src = {0.5, 0.25};
  head.att_dst = {0.1, 0.2};
  layer.per_head = {head};
  model.layers = {layer};
  model.validate();

  // the same arithmetic, spelled out
  const double z0[2] = {1.0, -1.0}, z1[2] = {2.0, -2.0};
  auto lrelu = [](double x) { return x > 0 ? x : 0.2 * x; };
  const double u00 = lrelu(0.5 * z0[0] + 0.25 * z0[1] + 0.1 * z0[0] + 0.2 * z0[1]);
  const double u10 = lrelu(0.5 * z1[0] + 0.25 * z1[1] + 0.1 * z0[0] + 0.2 * z0[1]);
  const double a00 = std::exp(u00) / (std::exp(u00) + std::exp(u10));
  const double a10 = 1.0 - a00;

  const ForwardResult r = forward(model, g);
  CHECK(r.attention.averaged[0].at(0, 0) == doctest::Approx(a00).epsilon(1e-12));
  CHECK(r.attention.averaged[0].at(0, 1) == doctest::Approx(a10).epsilon(1e-12));
  CHECK(r.attention.averaged[0].at(1, 1) == 1.0);  // node 1 only sees itself

  const double h0 = a00 * z0[0] + a10 * z1[0];
  const double h0b = a00 * z0[1] + a10 * z1[1];
  CHECK(r.prediction.logits.at(0, 0) == doctest::Approx(h0).epsilon(1e-12));
  CHECK(r.prediction.logits.at(0, 1) == doctest::Approx(h0b).epsilon(1e-12));
  CHECK(r.prediction.logits.at(1, 0) == doctest::Approx(z1[0]).epsilon(1e-12));

  const double p00 = std::exp(h0) / (std::exp(h0) + std::exp(h0b));
  CHECK(r.prediction.probs.at(0, 0) == doctest::Approx(p00).epsilon(1e-12));
}

TEST_CASE("erasure renormalizes the surviving support") {
  const Graph g = fixture_graph();
  const GatModel model = init_model(12, {3, 5, 2}, {1, 1});
  const InAdjacency adj(g);

  AttentionStack base;
  detail::forward_logits(model, g, adj, nullptr, nullptr, &base);

  const Edge erased{1, 2};  // node 2 also hears from 4 and itself
  AttentionStack cut;
  detail::forward_logits(model, g, adj, &erased, nullptr, &cut);

  for (int l = 0; l < base.num_layers(); ++l) {
    CHECK(cut.averaged[static_cast<std::size_t>(l)].at(2, 1) == 0.0);
    for (int j = 0; j < g.num_nodes; ++j) {
      CHECK(cut.averaged[static_cast<std::size_t>(l)].row_sum(j) ==
            doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  // survivors at the first layer keep their relative proportions
  const auto& b0 = base.averaged[0];
  const auto& c0 = cut.averaged[0];
  CHECK(c0.at(2, 2) / c0.at(2, 4) ==
        doctest::Approx(b0.at(2, 2) / b0.at(2, 4)).epsilon(1e-9));
  CHECK(c0.at(2, 2) ==
        doctest::Approx(b0.at(2, 2) / (1.0 - b0.at(2, 1))).epsilon(1e-9));
  // untouched destinations are bit-identical in the first layer
  for (int j = 0; j < g.num_nodes; ++j) {
    if (j == 2) continue;
    for (const auto& e : b0.row(j)) CHECK(c0.at(e.row, e.col) == e.value);
  }
}

TEST_CASE("erasing a destination's whole support is a numeric error") {
  // node 1's only in-edge is its own self-loop
  Graph g;
  g.num_nodes = 2;
  g.edges = {{1, 0}};
  g.features = {{1.0, 0.0}, {0.0, 1.0}};
  g = add_self_loops(g);
  const GatModel model = init_model(8, {2, 3, 2}, {1, 1});
  CHECK_THROWS_AS(forward_with_erasure(model, g, Edge{1, 1}), NumericError);
  CHECK_NOTHROW(forward_with_erasure(model, g, Edge{1, 0}));
}

TEST_CASE("erasure equals a forward pass on the graph without the edge") {
  const Graph g = fixture_graph(123);
  const GatModel model = init_model(21, {3, 4, 4, 2}, {2, 1, 1});
  const Edge e{3, 4};

  Graph cut = g;
  cut.edges.erase(std::find(cut.edges.begin(), cut.edges.end(), e));

  const Prediction erased = forward_with_erasure(model, g, e);
  const ForwardResult direct = forward(model, cut);
  REQUIRE(erased.probs.data.size() == direct.prediction.probs.data.size());
  for (std::size_t i = 0; i < erased.probs.data.size(); ++i) {
    CHECK(erased.probs.data[i] ==
          doctest::Approx(direct.prediction.probs.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("duplicated heads behave like one head") {
  const Graph g = fixture_graph(5);
  GatModel one = init_model(33, {3, 2}, {1});
  GatModel two = one;
  two.layers[0].heads = 2;
  two.layers[0].per_head.push_back(two.layers[0].per_head[0]);

  const ForwardResult r1 = forward(one, g);
  const ForwardResult r2 = forward(two, g);
  CHECK(r2.attention.averaged[0] == r1.attention.averaged[0]);
  CHECK(r2.attention.per_head[0][0] == r2.attention.per_head[0][1]);
  for (std::size_t i = 0; i < r1.prediction.logits.data.size(); ++i) {
    CHECK(r2.prediction.logits.data[i] ==
          doctest::Approx(r1.prediction.logits.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("softmax_prediction is shift-stable") {
  Dense logits(1, 3);
  logits.at(0, 0) = 1000.0;
  logits.at(0, 1) = 1001.0;
  logits.at(0, 2) = 999.0;
  const Prediction p = softmax_prediction(logits);
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    CHECK(std::isfinite(p.probs.at(0, c)));
    total += p.probs.at(0, c);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  const double e0 = std::exp(-1.0), e1 = 1.0, e2 = std::exp(-2.0);
  CHECK(p.probs.at(0, 1) == doctest::Approx(e1 / (e0 + e1 + e2)).epsilon(1e-12));
}

TEST_CASE("feature dimension mismatch rejected") {
  const Graph g = fixture_graph();
  const GatModel model = init_model(2, {4, 3, 2}, {1, 1});  // expects 4 features
  CHECK_THROWS_AS(forward(model, g), ValidationError);
}
