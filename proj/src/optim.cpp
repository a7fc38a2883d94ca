#include "dldl/optim.hpp"

#include <cmath>

#include "dldl/errors.hpp"

namespace dldl {

AdamState AdamState::for_size(std::size_t n, double base_lr) {
  AdamState s;
  s.first_moment.assign(n, 0.0);
  s.second_moment.assign(n, 0.0);
  s.base_lr = base_lr;
  return s;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState &state,
               double lr) {
  if (params.size() != grads.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size())
    throw InvalidArgument("Adam parameter, gradient and moment shapes disagree");
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double &m = state.first_moment[i];
    double &v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * grads[i];
    v = state.beta2 * v + (1.0 - state.beta2) * grads[i] * grads[i];
    params[i] -= lr * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
  }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState &state) {
  adam_step(params, grads, state, state.base_lr);
}

double lr_at_epoch(double base_lr, std::uint64_t epoch) {
  double lr = base_lr;
  for (std::uint64_t k = epoch / 30; k > 0; --k)
    lr /= 10.0;
  return lr;
}

} // namespace dldl
