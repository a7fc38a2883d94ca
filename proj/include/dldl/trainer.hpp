#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dldl/data.hpp"
#include "dldl/model.hpp"
#include "dldl/optim.hpp"

namespace dldl {

struct TrainOptions {
  std::size_t epochs = 60;
  std::size_t batch_size = 64;
  double base_lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Seeds the per-epoch shuffle.
  std::uint64_t seed = 1;
  bool parallel = true;
};

struct EpochLog {
  std::size_t epoch = 0;
  double lr = 0.0;
  /// Means over the epoch's batches; ld / er are NaN for heads without them.
  double loss = 0.0;
  double ld = 0.0;
  double er = 0.0;
  double train_mae = 0.0;
  /// NaN without a test set.
  double test_mae = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> history;
};

using EpochCallback = std::function<void(const EpochLog &, const Model &)>;

/// Mini-batch Adam with the step-decay schedule. Batches are drawn from a
/// seeded shuffle each epoch; the last batch may be short.
TrainResult train(Model model, const Dataset &train_set, const Dataset *test_set,
                  const TrainOptions &options, const EpochCallback &on_epoch = {});

Vector predict_all(const Model &model, const Dataset &data, bool parallel = true);

} // namespace dldl
