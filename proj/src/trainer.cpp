#include "dldl/trainer.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "dldl/errors.hpp"
#include "dldl/kernels.hpp"
#include "dldl/metrics.hpp"

namespace dldl {

Vector predict_all(const Model &model, const Dataset &data, bool parallel) {
  return parallel ? predict_parallel(model, data) : predict_serial(model, data);
}

TrainResult train(Model model, const Dataset &train_set, const Dataset *test_set,
                  const TrainOptions &options, const EpochCallback &on_epoch) {
  validate_model(model);
  validate_dataset(train_set);
  if (options.batch_size == 0)
    throw InvalidArgument("batch size must be positive");
  if (!(options.base_lr > 0.0))
    throw InvalidArgument("learning rate must be positive");
  if (train_set.dim() != model.input_dim())
    throw InvalidArgument("training features do not match the model input");

  TrainResult result;
  AdamState adam = AdamState::for_size(model.parameter_count(), options.base_lr);
  adam.beta1 = options.beta1;
  adam.beta2 = options.beta2;
  adam.epsilon = options.epsilon;

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  GradientScratch scratch;
  Vector params = model.flatten();
  const Vector truths = train_set.targets();
  const Vector test_truths = test_set ? test_set->targets() : Vector{};

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(order[i], order[pick(rng)]);
    }
    const double lr = lr_at_epoch(options.base_lr, epoch);
    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t len = std::min(options.batch_size, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, len);
      const BatchResult r = options.parallel
                                ? batch_gradient_parallel(model, train_set, batch, scratch)
                                : batch_gradient_serial(model, train_set, batch);
      adam_step(params, r.grad, adam, lr);
      model.assign(params);
      log.loss += r.loss;
      log.ld += r.ld;
      log.er += r.er;
      ++batches;
    }
    log.loss /= static_cast<double>(batches);
    log.ld /= static_cast<double>(batches);
    log.er /= static_cast<double>(batches);
    if (!std::isfinite(log.loss) || !all_finite(params))
      throw NumericalDomain("training diverged at epoch " + std::to_string(epoch));
    log.train_mae = mae(predict_all(model, train_set, options.parallel), truths);
    log.test_mae = test_set && !test_set->empty()
                       ? mae(predict_all(model, *test_set, options.parallel), test_truths)
                       : NAN;
    result.history.push_back(log);
    if (on_epoch)
      on_epoch(log, model);
  }
  result.model = std::move(model);
  return result;
}

} // namespace dldl
