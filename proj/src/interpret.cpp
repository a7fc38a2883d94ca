#include "dldl/interpret.hpp"

#include <cmath>
#include <omp.h>
#include <sstream>

#include "dldl/data.hpp"
#include "dldl/errors.hpp"
#include "dldl/metrics.hpp"

namespace dldl {

FeatureMap class_activation_maps(const FeatureMap &maps, const HeadParams &params) {
  validate_feature_map(maps);
  if (maps.channels != params.feature_dim())
    throw InvalidArgument("feature map has " + std::to_string(maps.channels) +
                          " channels but the head expects " +
                          std::to_string(params.feature_dim()));
  if (params.bias.size() != params.outputs())
    throw InvalidArgument("head bias length does not match weight rows");
  const std::size_t area = maps.height * maps.width;
  FeatureMap out(params.outputs(), maps.height, maps.width);
  for (std::size_t k = 0; k < params.outputs(); ++k) {
    double *dst = out.values.data() + k * area;
    for (std::size_t p = 0; p < area; ++p)
      dst[p] = params.bias[k];
    for (std::size_t j = 0; j < maps.channels; ++j) {
      const double w = params.weight(k, j);
      const double *src = maps.values.data() + j * area;
      for (std::size_t p = 0; p < area; ++p)
        dst[p] += w * src[p];
    }
  }
  return out;
}

ScoreMap score_map(const FeatureMap &activations, std::span<const double> probs) {
  validate_feature_map(activations);
  if (probs.size() != activations.channels)
    throw InvalidArgument("probability count does not match the activation stack");
  ScoreMap s{activations.height, activations.width,
             Matrix(activations.height, activations.width)};
  const std::size_t area = activations.height * activations.width;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double *src = activations.values.data() + k * area;
    for (std::size_t p = 0; p < area; ++p)
      s.values.data[p] += probs[k] * src[p];
  }
  return s;
}

ScoreMap score_map(const FeatureMap &activations, const Distribution &pred) {
  return score_map(activations, pred.probs);
}

Vector cell_means(const GridInputs &grids) {
  const std::size_t cells = grids.height * grids.width;
  if (grids.inputs.empty())
    throw InvalidArgument("no grids to average");
  Vector mean(cells, 0.0);
  for (const auto &g : grids.inputs) {
    if (g.size() != cells)
      throw InvalidArgument("grid input does not match the declared shape");
    for (std::size_t c = 0; c < cells; ++c)
      mean[c] += g[c];
  }
  for (double &m : mean)
    m /= static_cast<double>(grids.inputs.size());
  return mean;
}

std::size_t occlusion_positions(std::size_t extent, std::size_t mask, std::size_t stride) {
  if (mask == 0 || stride == 0 || mask > extent)
    throw InvalidArgument("occlusion mask must be non-empty, fit the grid and use a positive stride");
  return (extent - mask) / stride + 1;
}

OcclusionGrid occlusion_sensitivity(const GridPredictor &predictor, const GridInputs &grids,
                                    std::size_t mask_height, std::size_t mask_width,
                                    std::size_t stride, std::span<const double> fill,
                                    bool parallel) {
  const std::size_t cells = grids.height * grids.width;
  if (grids.inputs.empty() || grids.inputs.size() != grids.truths.size())
    throw InvalidArgument("occlusion needs inputs with matching targets");
  for (const auto &g : grids.inputs)
    if (g.size() != cells)
      throw InvalidArgument("grid input does not match the declared shape");
  if (fill.size() != cells)
    throw InvalidArgument("fill values do not match the grid shape");
  const std::size_t rows = occlusion_positions(grids.height, mask_height, stride);
  const std::size_t cols = occlusion_positions(grids.width, mask_width, stride);

  const std::size_t n = grids.inputs.size();
  Vector clean(n);
  for (std::size_t i = 0; i < n; ++i)
    clean[i] = predictor(grids.inputs[i]);
  OcclusionGrid out;
  out.mask_height = mask_height;
  out.mask_width = mask_width;
  out.stride = stride;
  out.clean_mae = mae(clean, grids.truths);
  if (out.clean_mae == 0.0)
    throw DegenerateBaseline("unoccluded MAE is zero; relative loss is undefined");
  out.occluded_mae = Matrix(rows, cols);
  out.relative_loss = Matrix(rows, cols);

  const auto positions = static_cast<std::ptrdiff_t>(rows * cols);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t pos = 0; pos < positions; ++pos) {
    try {
      const std::size_t pr = static_cast<std::size_t>(pos) / cols;
      const std::size_t pc = static_cast<std::size_t>(pos) % cols;
      const std::size_t r0 = pr * stride, c0 = pc * stride;
      Vector occluded(cells);
      Vector preds(n);
      for (std::size_t i = 0; i < n; ++i) {
        occluded = grids.inputs[i];
        for (std::size_t r = r0; r < r0 + mask_height; ++r)
          for (std::size_t c = c0; c < c0 + mask_width; ++c)
            occluded[r * grids.width + c] = fill[r * grids.width + c];
        preds[i] = predictor(occluded);
      }
      const double m = mae(preds, grids.truths);
      out.occluded_mae(pr, pc) = m;
      out.relative_loss(pr, pc) = (m - out.clean_mae) / out.clean_mae;
    } catch (...) {
#pragma omp critical
      if (!failure)
        failure = std::current_exception();
    }
  }
  if (failure)
    std::rethrow_exception(failure);
  return out;
}

std::string matrix_to_csv(const Matrix &m) {
  std::ostringstream out;
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c)
        out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  return out.str();
}

} // namespace dldl
