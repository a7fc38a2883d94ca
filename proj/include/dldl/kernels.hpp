#pragma once

#include <span>
#include <vector>

#include "dldl/data.hpp"
#include "dldl/model.hpp"

namespace dldl {

/// Mean loss and gradient over a batch of samples.
struct BatchResult {
  Vector grad;
  double loss = 0.0;
  /// Means of the distribution / expectation terms; NaN for heads without them.
  double ld = 0.0;
  double er = 0.0;
  std::size_t count = 0;
};

/// Per-sample gradient rows reused across batches by the parallel kernel.
struct GradientScratch {
  std::vector<double> rows;
  std::vector<SampleLoss> losses;
  std::vector<Workspace> workspaces;
};

/// Reference implementation: one sample at a time, accumulating in index order.
BatchResult batch_gradient_serial(const Model &model, const Dataset &data,
                                  std::span<const std::size_t> indices);

/// OpenMP version. Per-sample gradients land in separate rows and are then
/// summed per parameter in sample order, so the result is bitwise identical
/// to the serial kernel for any thread count.
BatchResult batch_gradient_parallel(const Model &model, const Dataset &data,
                                    std::span<const std::size_t> indices,
                                    GradientScratch &scratch);

Vector predict_serial(const Model &model, const Dataset &data);
Vector predict_parallel(const Model &model, const Dataset &data);

} // namespace dldl
