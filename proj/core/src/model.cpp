#include "gatt/model.hpp"

#include <cmath>
#include <fstream>

#include "gatt/errors.hpp"
#include "gatt/rng.hpp"

namespace gatt {

std::size_t GatModel::num_params() const {
  std::size_t n = 0;
  for (const auto& layer : layers) {
    for (const auto& head : layer.per_head) {
      n += head.weight.data.size() + head.att_src.size() + head.att_dst.size();
    }
  }
  return n;
}

std::vector<double> GatModel::to_flat() const {
  std::vector<double> flat;
  flat.reserve(num_params());
  for (const auto& layer : layers) {
    for (const auto& head : layer.per_head) {
      flat.insert(flat.end(), head.weight.data.begin(), head.weight.data.end());
      flat.insert(flat.end(), head.att_src.begin(), head.att_src.end());
      flat.insert(flat.end(), head.att_dst.begin(), head.att_dst.end());
    }
  }
  return flat;
}

void GatModel::from_flat(const std::vector<double>& flat) {
  if (flat.size() != num_params()) {
    throw ValidationError("from_flat: parameter count mismatch");
  }
  std::size_t pos = 0;
  for (auto& layer : layers) {
    for (auto& head : layer.per_head) {
      std::copy_n(flat.begin() + pos, head.weight.data.size(),
                  head.weight.data.begin());
      pos += head.weight.data.size();
      std::copy_n(flat.begin() + pos, head.att_src.size(), head.att_src.begin());
      pos += head.att_src.size();
      std::copy_n(flat.begin() + pos, head.att_dst.size(), head.att_dst.begin());
      pos += head.att_dst.size();
    }
  }
}

void GatModel::validate() const {
  if (layers.empty()) throw ValidationError("model must have at least one layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.heads < 1 ||
        static_cast<int>(layer.per_head.size()) != layer.heads) {
      throw ValidationError("layer " + std::to_string(l) +
                            ": per_head size must equal heads");
    }
    const int fin = layer.in_dim();
    const int fout = layer.head_out_dim();
    for (const auto& head : layer.per_head) {
      if (head.weight.rows != fin || head.weight.cols != fout ||
          static_cast<int>(head.att_src.size()) != fout ||
          static_cast<int>(head.att_dst.size()) != fout) {
        throw ValidationError("layer " + std::to_string(l) +
                              ": inconsistent head shapes");
      }
      for (double x : head.weight.data) {
        if (!std::isfinite(x)) throw NumericError("non-finite model parameter");
      }
    }
    if (l + 1 < layers.size() && layers[l + 1].in_dim() != layer.out_dim()) {
      throw ValidationError("layer " + std::to_string(l) + " output dim " +
                            std::to_string(layer.out_dim()) +
                            " does not match next layer input");
    }
  }
  const auto& last = layers.back();
  if (last.merge != HeadMerge::Average) {
    throw ValidationError("final layer must average heads");
  }
  if (last.activation != Activation::Identity) {
    throw ValidationError("final layer must have identity activation (logits)");
  }
}

namespace {

std::string merge_name(HeadMerge m) {
  return m == HeadMerge::Concat ? "concat" : "average";
}
std::string activation_name(Activation a) {
  return a == Activation::Elu ? "elu" : "identity";
}
HeadMerge parse_merge(const std::string& s) {
  if (s == "concat") return HeadMerge::Concat;
  if (s == "average") return HeadMerge::Average;
  throw ValidationError("model schema: unknown head_merge '" + s + "'");
}
Activation parse_activation(const std::string& s) {
  if (s == "elu") return Activation::Elu;
  if (s == "identity") return Activation::Identity;
  throw ValidationError("model schema: unknown activation '" + s + "'");
}

}  // namespace

nlohmann::json model_to_json(const GatModel& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : m.layers) {
    nlohmann::json heads = nlohmann::json::array();
    for (const auto& head : layer.per_head) {
      nlohmann::json w = nlohmann::json::array();
      for (int r = 0; r < head.weight.rows; ++r) {
        w.push_back(std::vector<double>(
            head.weight.row(r), head.weight.row(r) + head.weight.cols));
      }
      heads.push_back({{"weight", std::move(w)},
                       {"att_src", head.att_src},
                       {"att_dst", head.att_dst}});
    }
    layers.push_back({{"heads", layer.heads},
                      {"leaky_slope", layer.leaky_slope},
                      {"head_merge", merge_name(layer.merge)},
                      {"activation", activation_name(layer.activation)},
                      {"per_head", std::move(heads)}});
  }
  return {{"layers", std::move(layers)}};
}

GatModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("layers") || !j.at("layers").is_array()) {
    throw ValidationError("model schema: missing 'layers' array");
  }
  GatModel m;
  for (const auto& jl : j.at("layers")) {
    LayerParams layer;
    layer.heads = jl.at("heads").get<int>();
    layer.leaky_slope = jl.at("leaky_slope").get<double>();
    layer.merge = parse_merge(jl.at("head_merge").get<std::string>());
    layer.activation = parse_activation(jl.at("activation").get<std::string>());
    for (const auto& jh : jl.at("per_head")) {
      HeadParams head;
      auto w = jh.at("weight").get<std::vector<std::vector<double>>>();
      if (w.empty()) throw ValidationError("model schema: empty weight matrix");
      head.weight = Dense(static_cast<int>(w.size()),
                          static_cast<int>(w.front().size()));
      for (int r = 0; r < head.weight.rows; ++r) {
        if (static_cast<int>(w[static_cast<std::size_t>(r)].size()) !=
            head.weight.cols) {
          throw ValidationError("model schema: ragged weight matrix");
        }
        std::copy(w[static_cast<std::size_t>(r)].begin(),
                  w[static_cast<std::size_t>(r)].end(), head.weight.row(r));
      }
      head.att_src = jh.at("att_src").get<std::vector<double>>();
      head.att_dst = jh.at("att_dst").get<std::vector<double>>();
      layer.per_head.push_back(std::move(head));
    }
    m.layers.push_back(std::move(layer));
  }
  m.validate();
  return m;
}

GatModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed model JSON in " + path.string() + ": " +
                          e.what());
  }
  return model_from_json(j);
}

void save_model(const GatModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write model file: " + path.string());
  out << model_to_json(m).dump(2) << '\n';
}

GatModel init_model(std::uint64_t seed, const std::vector<int>& layer_sizes,
                    const std::vector<int>& heads_per_layer, double init_scale,
                    double leaky_slope) {
  if (layer_sizes.size() < 2) {
    throw ValidationError("init_model: need at least [input, output] sizes");
  }
  if (heads_per_layer.size() != layer_sizes.size() - 1) {
    throw ValidationError("init_model: heads_per_layer length mismatch");
  }
  Rng rng(seed);
  GatModel m;
  const int num_layers = static_cast<int>(layer_sizes.size()) - 1;
  int fin = layer_sizes.front();
  for (int l = 0; l < num_layers; ++l) {
    LayerParams layer;
    layer.heads = heads_per_layer[static_cast<std::size_t>(l)];
    if (layer.heads < 1) throw ValidationError("init_model: heads must be >= 1");
    layer.leaky_slope = leaky_slope;
    const bool final_layer = l == num_layers - 1;
    layer.merge = final_layer ? HeadMerge::Average : HeadMerge::Concat;
    layer.activation = final_layer ? Activation::Identity : Activation::Elu;
    const int fout = layer_sizes[static_cast<std::size_t>(l) + 1];
    const double scale = init_scale / std::sqrt(static_cast<double>(fin));
    for (int h = 0; h < layer.heads; ++h) {
      HeadParams head;
      head.weight = Dense(fin, fout);
      for (double& x : head.weight.data) x = rng.next_double(-scale, scale);
      head.att_src.resize(static_cast<std::size_t>(fout));
      head.att_dst.resize(static_cast<std::size_t>(fout));
      const double att_scale = init_scale / std::sqrt(static_cast<double>(fout));
      for (double& x : head.att_src) x = rng.next_double(-att_scale, att_scale);
      for (double& x : head.att_dst) x = rng.next_double(-att_scale, att_scale);
      layer.per_head.push_back(std::move(head));
    }
    fin = layer.out_dim();
    m.layers.push_back(std::move(layer));
  }
  m.validate();
  return m;
}

}  // namespace gatt
