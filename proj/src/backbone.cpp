#include "dldl/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "dldl/errors.hpp"

namespace dldl {

std::vector<std::size_t> MlpParams::dims() const {
  std::vector<std::size_t> d;
  if (layers.empty())
    return d;
  d.push_back(layers.front().weight.cols);
  for (const auto &layer : layers)
    d.push_back(layer.weight.rows);
  return d;
}

void validate_mlp(const MlpParams &params) {
  if (params.layers.empty())
    throw InvalidArgument("backbone has no layers");
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    const auto &layer = params.layers[i];
    if (layer.bias.size() != layer.weight.rows)
      throw InvalidArgument("layer " + std::to_string(i) + " bias does not match rows");
    if (i > 0 && layer.weight.cols != params.layers[i - 1].weight.rows)
      throw InvalidArgument("layer " + std::to_string(i) + " input does not chain");
    if (!all_finite(layer.weight.data) || !all_finite(layer.bias))
      throw InvalidArgument("layer " + std::to_string(i) + " has non-finite entries");
  }
}

Vector mlp_forward(std::span<const double> input, const MlpParams &params, MlpCache &cache) {
  if (params.layers.empty() || input.size() != params.input_dim())
    throw InvalidArgument("input length " + std::to_string(input.size()) +
                          " does not match backbone input " +
                          std::to_string(params.input_dim()));
  const std::size_t n = params.layers.size();
  cache.input.assign(input.begin(), input.end());
  cache.pre.resize(n);
  cache.post.resize(n);
  std::span<const double> a = cache.input;
  for (std::size_t i = 0; i < n; ++i) {
    const auto &layer = params.layers[i];
    cache.pre[i].resize(layer.weight.rows);
    affine(layer.weight, layer.bias, a, cache.pre[i]);
    cache.post[i] = cache.pre[i];
    if (i + 1 < n)
      for (double &v : cache.post[i])
        v = v > 0.0 ? v : 0.0;
    a = cache.post[i];
  }
  return cache.post.back();
}

Vector mlp_forward(std::span<const double> input, const MlpParams &params) {
  MlpCache cache;
  return mlp_forward(input, params, cache);
}

MlpGradients mlp_backward(const MlpParams &params, const MlpCache &cache,
                          std::span<const double> d_features) {
  const std::size_t n = params.layers.size();
  if (cache.pre.size() != n || cache.input.size() != params.input_dim() ||
      d_features.size() != params.output_dim())
    throw InvalidArgument("backbone cache does not match parameters");
  MlpGradients grads;
  grads.layers.resize(n);
  Vector delta(d_features.begin(), d_features.end());
  for (std::size_t i = n; i-- > 0;) {
    const auto &layer = params.layers[i];
    if (cache.pre[i].size() != layer.weight.rows)
      throw InvalidArgument("backbone cache does not match parameters");
    if (i + 1 < n)
      for (std::size_t r = 0; r < delta.size(); ++r)
        if (!(cache.pre[i][r] > 0.0))
          delta[r] = 0.0;
    const std::span<const double> below =
        i == 0 ? std::span<const double>(cache.input) : std::span<const double>(cache.post[i - 1]);
    auto &g = grads.layers[i];
    g.weight = Matrix(layer.weight.rows, layer.weight.cols);
    add_outer(g.weight, delta, below);
    g.bias = delta;
    Vector next(layer.weight.cols);
    transposed_product(layer.weight, delta, next);
    delta = std::move(next);
  }
  grads.d_input = std::move(delta);
  return grads;
}

MlpParams init_params(std::span<const std::size_t> dims, std::uint64_t seed) {
  if (dims.size() < 2)
    throw InvalidArgument("backbone needs at least an input and an output width");
  std::mt19937_64 rng(seed);
  MlpParams params;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    if (dims[i] == 0 || dims[i + 1] == 0)
      throw InvalidArgument("layer widths must be positive");
    DenseLayer layer{Matrix(dims[i + 1], dims[i]), Vector(dims[i + 1], 0.0)};
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(dims[i])));
    for (double &w : layer.weight.data)
      w = normal(rng);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

void validate_feature_map(const FeatureMap &map) {
  if (map.height == 0 || map.width == 0 || map.channels == 0)
    throw InvalidArgument("feature map dimensions must be positive");
  if (map.values.size() != map.channels * map.height * map.width)
    throw InvalidArgument("feature map storage does not match its shape");
  if (!all_finite(map.values))
    throw InvalidArgument("feature map has non-finite entries");
}

Vector global_avg_pool(const FeatureMap &map) {
  validate_feature_map(map);
  Vector out(map.channels);
  const double area = static_cast<double>(map.height * map.width);
  for (std::size_t c = 0; c < map.channels; ++c) {
    double s = 0.0;
    for (double v : map.channel(c))
      s += v;
    out[c] = s / area;
  }
  return out;
}

FeatureMap max_pool_2x2(const FeatureMap &map) {
  validate_feature_map(map);
  if (map.height < 2 || map.width < 2)
    throw InvalidArgument("max pooling needs at least a 2x2 map");
  FeatureMap out(map.channels, map.height / 2, map.width / 2);
  for (std::size_t c = 0; c < map.channels; ++c)
    for (std::size_t r = 0; r < out.height; ++r)
      for (std::size_t col = 0; col < out.width; ++col)
        out.at(c, r, col) = std::max({map.at(c, 2 * r, 2 * col), map.at(c, 2 * r, 2 * col + 1),
                                      map.at(c, 2 * r + 1, 2 * col),
                                      map.at(c, 2 * r + 1, 2 * col + 1)});
  return out;
}

Vector hybrid_pool(const FeatureMap &map) { return global_avg_pool(max_pool_2x2(map)); }

} // namespace dldl
