#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dldl/backbone.hpp"
#include "dldl/heads.hpp"
#include "dldl/linalg.hpp"

namespace dldl {

/// Aggregated class evidence over the spatial grid of a feature map.
struct ScoreMap {
  std::size_t height = 0;
  std::size_t width = 0;
  Matrix values;
};

/// One map per head output: A^k = sum_j w_kj F^j + b_k. Returned as a
/// FeatureMap whose channels are the K classes.
FeatureMap class_activation_maps(const FeatureMap &maps, const HeadParams &params);

/// S = sum_k p_k A^k.
ScoreMap score_map(const FeatureMap &activations, std::span<const double> probs);
ScoreMap score_map(const FeatureMap &activations, const Distribution &pred);

/// A batch of single-channel row-major grids with their targets.
struct GridInputs {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Vector> inputs;
  Vector truths;
};

/// Per-cell mean over a set of grids; the default occlusion fill.
Vector cell_means(const GridInputs &grids);

struct OcclusionGrid {
  std::size_t mask_height = 0;
  std::size_t mask_width = 0;
  std::size_t stride = 0;
  double clean_mae = 0.0;
  /// MAE with the mask at each position.
  Matrix occluded_mae;
  /// (occluded - clean) / clean per position.
  Matrix relative_loss;
};

/// Must be safe to call concurrently.
using GridPredictor = std::function<double(std::span<const double>)>;

/// Slides a mask over every input, replacing covered cells with fill, and
/// records the relative MAE change per mask position. Positions are
/// independent; with parallel set they are spread over OpenMP threads.
OcclusionGrid occlusion_sensitivity(const GridPredictor &predictor, const GridInputs &grids,
                                    std::size_t mask_height, std::size_t mask_width,
                                    std::size_t stride, std::span<const double> fill,
                                    bool parallel = true);

/// Number of mask positions along one axis.
std::size_t occlusion_positions(std::size_t extent, std::size_t mask, std::size_t stride);

/// Plain CSV of a matrix, one row per line.
std::string matrix_to_csv(const Matrix &m);

} // namespace dldl
