// Command-line front end: generate / train / attribute / eval.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gatt/attribution.hpp"
#include "gatt/dataset.hpp"
#include "gatt/engine.hpp"
#include "gatt/errors.hpp"
#include "gatt/eval.hpp"
#include "gatt/graph.hpp"
#include "gatt/model.hpp"
#include "gatt/trainer.hpp"

namespace {

using namespace gatt;

std::vector<Method> parse_methods(const std::string& csv) {
  std::vector<Method> methods;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    methods.push_back(parse_method(item));
  }
  if (methods.empty()) throw ValidationError("--methods: empty method list");
  return methods;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file '" + path + "'");
  return out;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

int num_classes(const Graph& g) {
  if (!g.labels) throw ValidationError("dataset has no labels");
  int classes = 0;
  for (int l : *g.labels) classes = std::max(classes, l + 1);
  return classes;
}

void check_model_matches(const GatModel& model, const Graph& g) {
  if (model.input_dim() != g.feature_dim()) {
    throw ValidationError("model expects " + std::to_string(model.input_dim()) +
                          " input features, dataset has " +
                          std::to_string(g.feature_dim()));
  }
}

int cmd_generate(const std::string& dataset, std::uint64_t seed,
                 const std::string& out_path) {
  DatasetBundle bundle;
  if (dataset == "ba-shapes") {
    bundle = generate_ba_shapes(seed);
  } else if (dataset == "infection") {
    bundle = generate_infection(seed);
  } else {
    throw ValidationError("unknown dataset '" + dataset +
                          "' (expected ba-shapes or infection)");
  }
  save_bundle(bundle, out_path);
  std::cout << dataset << ": " << bundle.graph.num_nodes << " nodes, "
            << bundle.graph.edges.size() << " directed edges, "
            << num_classes(bundle.graph) << " classes -> " << out_path << '\n';
  return 0;
}

int cmd_train(const std::string& data_path, const std::string& out_path,
              std::uint64_t seed, int layers, int hidden, int heads, int epochs,
              double lr) {
  if (layers < 1) throw ValidationError("--layers must be >= 1");
  if (hidden < 1) throw ValidationError("--hidden must be >= 1");
  if (heads < 1) throw ValidationError("--heads must be >= 1");
  if (epochs < 0) throw ValidationError("--epochs must be >= 0");
  const DatasetBundle bundle = load_bundle(data_path);

  std::vector<int> sizes{bundle.graph.feature_dim()};
  for (int l = 1; l < layers; ++l) sizes.push_back(hidden);
  sizes.push_back(num_classes(bundle.graph));
  const std::vector<int> heads_per_layer(static_cast<std::size_t>(layers), heads);

  GatModel model = init_model(seed, sizes, heads_per_layer);
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.learning_rate = lr;
  cfg.seed = seed;
  auto [trained, trace] = train(std::move(model), bundle, cfg);
  save_model(trained, out_path);

  std::ofstream trace_out = open_out(out_path + ".trace.csv");
  trace_out << "epoch,loss,train_acc,val_acc\n";
  for (std::size_t e = 0; e < trace.loss.size(); ++e) {
    trace_out << e << ',' << trace.loss[e] << ',' << trace.train_acc[e] << ','
              << trace.val_acc[e] << '\n';
  }
  if (!trace.loss.empty()) {
    std::cout << "final loss " << trace.loss.back() << ", train acc "
              << trace.train_acc.back() << ", val acc " << trace.val_acc.back()
              << '\n';
  }
  std::cout << "model -> " << out_path << '\n';
  return 0;
}

int cmd_attribute(const std::string& data_path, const std::string& model_path,
                  const std::string& out_path, std::uint64_t seed,
                  const std::string& methods_csv, const std::string& targets_arg) {
  const DatasetBundle bundle = load_bundle(data_path);
  const GatModel model = load_model(model_path);
  check_model_matches(model, bundle.graph);
  const std::vector<Method> methods = parse_methods(methods_csv);

  std::vector<int> targets;
  if (targets_arg == "all") {
    for (int v = 0; v < bundle.graph.num_nodes; ++v) targets.push_back(v);
  } else {
    std::stringstream ss(targets_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      int v = 0;
      try {
        v = std::stoi(item);
      } catch (const std::exception&) {
        throw ValidationError("--targets: bad node id '" + item + "'");
      }
      if (v < 0 || v >= bundle.graph.num_nodes) {
        throw ValidationError("--targets: node " + item + " out of range");
      }
      targets.push_back(v);
    }
    if (targets.empty()) throw ValidationError("--targets: empty target list");
  }

  const Graph graph = add_self_loops(bundle.graph);
  const AttentionStack stack = extract_attention(model, graph);
  const AttributionContext ctx(stack, graph);
  const AttributionTable table = attribute_targets(ctx, targets, methods, seed);
  std::ofstream out = open_out(out_path);
  table.write_csv(out);
  std::cout << table.rows.size() << " rows -> " << out_path << '\n';
  return 0;
}

int cmd_eval(const std::string& data_path, const std::string& model_path,
             const std::string& out_path, std::uint64_t seed,
             const std::string& mode, const std::string& methods_csv,
             int n_targets, int threads, const std::string& raw_path) {
  const DatasetBundle bundle = load_bundle(data_path);
  const GatModel model = load_model(model_path);
  check_model_matches(model, bundle.graph);
  const std::vector<Method> methods = parse_methods(methods_csv);

  Report report;
  if (mode == "faithfulness") {
    FaithfulnessOptions options;
    options.methods = methods;
    options.n_targets = n_targets;
    options.seed = seed;
    options.threads = threads;
    options.keep_raw = !raw_path.empty();
    report = run_faithfulness(model, bundle, options);
    report.config["mode"] = "faithfulness";
  } else if (mode == "accuracy") {
    if (bundle.graph.ground_truth_edges.empty() &&
        bundle.ground_truth_paths.empty()) {
      throw ValidationError("accuracy mode needs ground truth in the dataset");
    }
    const std::vector<int> targets = accuracy_targets(bundle);
    const Graph graph = add_self_loops(bundle.graph);
    const AttentionStack stack = extract_attention(model, graph);
    const AttributionContext ctx(stack, graph);
    const AttributionTable table = attribute_targets(ctx, targets, methods, seed);
    int skipped = 0;
    const auto aurocs = run_accuracy(table, bundle, &skipped);
    for (const auto& [method, value] : aurocs) {
      report.methods[method].accuracy_auroc = value;
    }
    report.skipped_targets_without_positives = skipped;
    report.config["mode"] = "accuracy";
    report.config["n_targets"] = static_cast<int>(targets.size());
    report.config["target_selection"] = bundle.ground_truth_paths.empty()
                                            ? "motif-labeled nodes"
                                            : "unique-path targets";
  } else {
    throw ValidationError("--mode must be faithfulness or accuracy");
  }
  report.config["seed"] = seed;
  nlohmann::json jm = nlohmann::json::array();
  for (Method m : methods) jm.push_back(method_name(m));
  report.config["methods"] = std::move(jm);

  if (!raw_path.empty() && mode == "faithfulness") {
    std::ofstream raw_out = open_out(raw_path);
    report.write_raw_csv(raw_out);
    report.raw.clear();
  }
  write_json(report.to_json(), out_path);
  report.print_summary(std::cout);
  std::cout << "report -> " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph attention edge attribution toolkit"};
  app.require_subcommand(1);

  std::string dataset, data_path, model_path, out_path, raw_path;
  std::string methods_csv = "gatt,avg_att,random";
  std::string targets_arg = "all";
  std::string mode;
  std::uint64_t seed = 0;
  int layers = 3, hidden = 16, heads = 1, epochs = 200;
  int n_targets = 100, threads = 1;
  double lr = 0.01;

  CLI::App* gen = app.add_subcommand("generate", "generate a synthetic dataset");
  gen->add_option("--dataset", dataset, "ba-shapes or infection")->required();
  gen->add_option("--seed", seed, "generator seed")->required();
  gen->add_option("--out", out_path, "output dataset JSON path")->required();

  CLI::App* tr = app.add_subcommand("train", "train a GAT on a dataset");
  tr->add_option("--data", data_path, "dataset JSON path")->required();
  tr->add_option("--out", out_path, "output model JSON path")->required();
  tr->add_option("--seed", seed, "init and training seed")->required();
  tr->add_option("--layers", layers, "number of layers")->capture_default_str();
  tr->add_option("--hidden", hidden, "hidden width per head")->capture_default_str();
  tr->add_option("--heads", heads, "attention heads per layer")->capture_default_str();
  tr->add_option("--epochs", epochs, "training epochs")->capture_default_str();
  tr->add_option("--lr", lr, "learning rate")->capture_default_str();

  CLI::App* at = app.add_subcommand("attribute", "score edges for targets");
  at->add_option("--data", data_path, "dataset JSON path")->required();
  at->add_option("--model", model_path, "model JSON path")->required();
  at->add_option("--out", out_path, "output CSV path")->required();
  at->add_option("--seed", seed, "seed for the random baseline")->required();
  at->add_option("--methods", methods_csv,
                 "comma list: gatt,gatt_sim,gatt_avg,avg_att,random")
      ->capture_default_str();
  at->add_option("--targets", targets_arg, "'all' or comma list of node ids")
      ->capture_default_str();

  CLI::App* ev = app.add_subcommand("eval", "faithfulness or accuracy report");
  ev->add_option("--data", data_path, "dataset JSON path")->required();
  ev->add_option("--model", model_path, "model JSON path")->required();
  ev->add_option("--out", out_path, "output report JSON path")->required();
  ev->add_option("--seed", seed, "target sampling / baseline seed")->required();
  ev->add_option("--mode", mode, "faithfulness or accuracy")->required();
  ev->add_option("--methods", methods_csv,
                 "comma list: gatt,gatt_sim,gatt_avg,avg_att,random")
      ->capture_default_str();
  ev->add_option("--n-targets", n_targets, "faithfulness target sample size")
      ->capture_default_str();
  ev->add_option("--threads", threads, "worker cap; results are thread-count independent")
      ->capture_default_str();
  ev->add_option("--raw-out", raw_path, "optional raw per-pair CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_generate(dataset, seed, out_path);
    if (tr->parsed()) {
      return cmd_train(data_path, out_path, seed, layers, hidden, heads, epochs, lr);
    }
    if (at->parsed()) {
      return cmd_attribute(data_path, model_path, out_path, seed, methods_csv,
                           targets_arg);
    }
    return cmd_eval(data_path, model_path, out_path, seed, mode, methods_csv,
                    n_targets, threads, raw_path);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
