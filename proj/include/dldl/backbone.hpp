#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dldl/linalg.hpp"

namespace dldl {

struct DenseLayer {
  Matrix weight; // out x in
  Vector bias;

  bool operator==(const DenseLayer &) const = default;
};

/// Dense stack with rectifiers between layers and a linear final layer.
struct MlpParams {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols; }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows; }
  std::vector<std::size_t> dims() const;

  bool operator==(const MlpParams &) const = default;
};

/// Per-layer activations kept for the backward pass.
struct MlpCache {
  Vector input;
  std::vector<Vector> pre;  // W a + b per layer
  std::vector<Vector> post; // rectified pre (final layer: identity)
};

struct MlpGradients {
  std::vector<DenseLayer> layers;
  Vector d_input;
};

void validate_mlp(const MlpParams &params);

/// Returns the final pre-activation output; no rectifier on the last layer.
Vector mlp_forward(std::span<const double> input, const MlpParams &params, MlpCache &cache);
Vector mlp_forward(std::span<const double> input, const MlpParams &params);

MlpGradients mlp_backward(const MlpParams &params, const MlpCache &cache,
                          std::span<const double> d_features);

/// He-normal weights (std = sqrt(2 / fan_in)), zero biases.
MlpParams init_params(std::span<const std::size_t> dims, std::uint64_t seed);

/// channels x height x width, channel-major.
struct FeatureMap {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  Vector values;

  FeatureMap() = default;
  FeatureMap(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
      : channels(c), height(h), width(w), values(c * h * w, fill) {}

  double &at(std::size_t c, std::size_t r, std::size_t col) {
    return values[(c * height + r) * width + col];
  }
  double at(std::size_t c, std::size_t r, std::size_t col) const {
    return values[(c * height + r) * width + col];
  }
  std::span<const double> channel(std::size_t c) const {
    return {values.data() + c * height * width, height * width};
  }
};

void validate_feature_map(const FeatureMap &map);

Vector global_avg_pool(const FeatureMap &map);

/// 2x2 window, stride 2; an odd trailing row or column is dropped.
FeatureMap max_pool_2x2(const FeatureMap &map);

/// Max pooling followed by global average pooling.
Vector hybrid_pool(const FeatureMap &map);

} // namespace dldl
