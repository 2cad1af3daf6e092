#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace gatt {

// Row-major dense matrix, just enough for layer parameters and features.
struct Dense {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Dense() = default;
  Dense(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const {
    return data.data() + static_cast<std::size_t>(r) * cols;
  }
};

enum class HeadMerge { Concat, Average };
enum class Activation { Elu, Identity };

struct HeadParams {
  Dense weight;                 // F_in x F_out
  std::vector<double> att_src;  // F_out
  std::vector<double> att_dst;  // F_out
};

struct LayerParams {
  int heads = 1;
  double leaky_slope = 0.2;
  HeadMerge merge = HeadMerge::Concat;
  Activation activation = Activation::Elu;
  std::vector<HeadParams> per_head;

  int in_dim() const { return per_head.front().weight.rows; }
  int head_out_dim() const { return per_head.front().weight.cols; }
  int out_dim() const {
    return merge == HeadMerge::Concat ? heads * head_out_dim() : head_out_dim();
  }
};

// L-layer, multi-head additive-attention network for node classification.
// The final layer averages heads and emits raw logits.
struct GatModel {
  std::vector<LayerParams> layers;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int input_dim() const { return layers.front().in_dim(); }
  int output_dim() const { return layers.back().out_dim(); }

  std::size_t num_params() const;
  std::vector<double> to_flat() const;
  void from_flat(const std::vector<double>& flat);

  // Throws ValidationError unless adjacent layer dimensions compose and
  // the final layer is average-merged with identity activation.
  void validate() const;
};

nlohmann::json model_to_json(const GatModel& m);
GatModel model_from_json(const nlohmann::json& j);
GatModel load_model(const std::filesystem::path& path);
void save_model(const GatModel& m, const std::filesystem::path& path);

// Seeded uniform init scaled by init_scale / sqrt(fan_in). layer_sizes is
// [F_in, hidden..., classes] with per-head output widths; hidden layers
// concat heads, the final layer averages them.
GatModel init_model(std::uint64_t seed, const std::vector<int>& layer_sizes,
                    const std::vector<int>& heads_per_layer,
                    double init_scale = 1.0, double leaky_slope = 0.2);

}  // namespace gatt
