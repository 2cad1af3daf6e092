#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>
#include <utility>
#include <vector>

#include "gatt/dataset.hpp"
#include "gatt/engine.hpp"
#include "gatt/errors.hpp"
#include "gatt/eval.hpp"
#include "gatt/rng.hpp"
#include "gatt/trainer.hpp"

using namespace gatt;

namespace {

DatasetBundle small_bundle(std::uint64_t seed = 42) {
  InfectionConfig cfg;
  cfg.n_nodes = 150;
  cfg.edge_prob = 0.025;
  cfg.n_infected = 12;
  cfg.max_dist = 3;
  return generate_infection(seed, cfg);
}

GatModel small_model(const DatasetBundle& b) {
  TrainConfig tc;
  tc.epochs = 40;
  auto [m, trace] =
      train(init_model(1, {b.graph.feature_dim(), 8, 8, 4}, {1, 1, 1}), b, tc);
  return std::move(m);
}

AttentionStack stochastic_stack(const Graph& g, int L, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<int>> in_of(static_cast<std::size_t>(g.num_nodes));
  for (const auto& [s, d] : g.edges) in_of[static_cast<std::size_t>(d)].push_back(s);
  std::vector<SparseMatrix> layers;
  for (int l = 0; l < L; ++l) {
    SparseMatrix m(g.num_nodes);
    for (int j = 0; j < g.num_nodes; ++j) {
      const auto& in = in_of[static_cast<std::size_t>(j)];
      double total = 0.0;
      std::vector<double> w(in.size());
      for (auto& v : w) total += v = 0.1 + rng.next_double();
      for (std::size_t k = 0; k < in.size(); ++k) m.set(j, in[k], w[k] / total);
    }
    layers.push_back(std::move(m));
  }
  return make_stack(std::move(layers));
}

}  // namespace

TEST_CASE("faithfulness report is independent of the thread count") {
  const DatasetBundle b = small_bundle();
  const GatModel model = small_model(b);
  FaithfulnessOptions opt;
  opt.n_targets = 12;
  opt.seed = 5;
  opt.keep_raw = true;

  opt.threads = 1;
  const Report r1 = run_faithfulness(model, b, opt);
  opt.threads = 4;
  const Report r4 = run_faithfulness(model, b, opt);
  opt.threads = 7;
  const Report r7 = run_faithfulness(model, b, opt);

  // config records the thread count, so compare methods and raw data
  CHECK(r1.to_json()["methods"].dump() == r4.to_json()["methods"].dump());
  CHECK(r1.to_json()["methods"].dump() == r7.to_json()["methods"].dump());
  std::ostringstream c1, c4;
  r1.write_raw_csv(c1);
  r4.write_raw_csv(c4);
  CHECK(c1.str() == c4.str());
  CHECK(r1.skipped_degenerate_erasures == r4.skipped_degenerate_erasures);
}

TEST_CASE("faithfulness raw rows carry the advertised schema") {
  const DatasetBundle b = small_bundle(7);
  const GatModel model = small_model(b);
  FaithfulnessOptions opt;
  opt.n_targets = 3;
  opt.keep_raw = true;
  const Report r = run_faithfulness(model, b, opt);
  REQUIRE_FALSE(r.raw.empty());
  std::ostringstream csv;
  r.write_raw_csv(csv);
  std::istringstream in(csv.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "target,src,dst,method,score,delta_pc,delta_ne,changed");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == r.raw.size());

  // without keep_raw the report stays lean but metrics agree
  opt.keep_raw = false;
  const Report lean = run_faithfulness(model, b, opt);
  CHECK(lean.raw.empty());
  CHECK(lean.to_json()["methods"].dump() == r.to_json()["methods"].dump());
}

TEST_CASE("degenerate metrics serialize as null") {
  Report r;
  MethodMetrics m;
  m.delta_pc.pearson = 0.5;
  r.methods[Method::GAtt] = m;
  const nlohmann::json j = r.to_json();
  CHECK(j["methods"]["GAtt"]["delta_pc"]["pearson"] == 0.5);
  CHECK(j["methods"]["GAtt"]["delta_pc"]["spearman"].is_null());
  CHECK(j["methods"]["GAtt"]["delta_p_auroc"].is_null());
  CHECK(j["skipped"]["degenerate_erasures"] == 0);

  std::ostringstream table;
  r.print_summary(table);
  CHECK(table.str().find("degenerate") != std::string::npos);
}

TEST_CASE("ground-truth indicator scores give perfect accuracy") {
  const DatasetBundle b = small_bundle(9);
  const Graph g = add_self_loops(b.graph);
  const AttentionStack stack = stochastic_stack(g, 3, 17);
  const AttributionContext ctx(stack, g);
  const std::vector<int> targets = accuracy_targets(b);
  REQUIRE_FALSE(targets.empty());

  AttributionTable table =
      attribute_targets(ctx, targets, {Method::GAtt, Method::Random}, 1);
  std::size_t pooled_pairs = 0;
  for (auto& row : table.rows) {
    if (row.method == Method::GAtt) {
      row.score = is_ground_truth(b, row.target, row.edge) ? 1.0 : 0.0;
    }
    ++pooled_pairs;
  }
  REQUIRE(pooled_pairs >= 2000);

  int skipped = 0;
  const auto result = run_accuracy(table, b, &skipped);
  REQUIRE(result.at(Method::GAtt).has_value());
  CHECK(*result.at(Method::GAtt) == 1.0);
  REQUIRE(result.at(Method::Random).has_value());
  CHECK(*result.at(Method::Random) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("targets without in-scope positives are skipped") {
  const DatasetBundle b = small_bundle(11);
  const Graph g = add_self_loops(b.graph);
  const AttentionStack stack = stochastic_stack(g, 3, 3);
  const AttributionContext ctx(stack, g);
  std::vector<int> targets = accuracy_targets(b);
  REQUIRE(targets.size() >= 2);
  targets.resize(2);

  AttributionTable table = attribute_targets(ctx, targets, {Method::GAtt}, 1);
  // an infected node has no ground-truth path, so it can never have positives
  int infected = -1;
  for (int v = 0; v < b.graph.num_nodes && infected < 0; ++v) {
    if (b.graph.features[static_cast<std::size_t>(v)][1] == 1.0) infected = v;
  }
  REQUIRE(infected >= 0);
  table.rows.push_back({infected, {infected, infected}, Method::GAtt, 0.9});

  int skipped = 0;
  const auto result = run_accuracy(table, b, &skipped);
  CHECK(skipped == 1);
  CHECK(result.at(Method::GAtt).has_value());
}

TEST_CASE("self-loops pool as negatives, never positives") {
  const DatasetBundle b = small_bundle(13);
  for (const auto& [target, path] : b.ground_truth_paths) {
    for (const auto& [s, d] : path) CHECK(s != d);
    CHECK_FALSE(is_ground_truth(b, target, {target, target}));
  }
}

TEST_CASE("accuracy rejects bundles with no ground truth at all") {
  DatasetBundle b = small_bundle(15);
  b.ground_truth_paths.clear();
  b.graph.ground_truth_edges.clear();
  AttributionTable table;
  table.rows.push_back({0, {0, 0}, Method::GAtt, 1.0});
  CHECK_THROWS_AS(run_accuracy(table, b), ValidationError);
}

TEST_CASE("faithfulness validates its options") {
  const DatasetBundle b = small_bundle(17);
  const GatModel model = init_model(1, {b.graph.feature_dim(), 4, 4}, {1, 1});
  FaithfulnessOptions opt;
  opt.n_targets = 0;
  CHECK_THROWS_AS(run_faithfulness(model, b, opt), ValidationError);
}
