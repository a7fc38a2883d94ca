#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dldl {

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double base_lr = 1e-3;

  static AdamState for_size(std::size_t n, double base_lr = 1e-3);
};

/// One bias-corrected Adam update of a flat parameter vector at rate lr.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState &state,
               double lr);

/// Same, at state.base_lr.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState &state);

/// Step decay: base_lr / 10 every 30 epochs.
double lr_at_epoch(double base_lr, std::uint64_t epoch);

} // namespace dldl
