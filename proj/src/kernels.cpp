#include "dldl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <omp.h>

#include "dldl/errors.hpp"

namespace dldl {

namespace {

void check_inputs(const Model &model, const Dataset &data, std::span<const std::size_t> indices) {
  if (indices.empty())
    throw InvalidArgument("batch is empty");
  if (data.dim() != model.input_dim())
    throw InvalidArgument("dataset feature length does not match the model input");
  for (std::size_t i : indices)
    if (i >= data.size())
      throw InvalidArgument("batch index out of range");
}

void finish(BatchResult &out, std::span<const SampleLoss> losses) {
  double loss = 0.0, ld = 0.0, er = 0.0;
  bool has_parts = true;
  for (const auto &s : losses) {
    loss += s.loss;
    if (s.ld && s.er) {
      ld += *s.ld;
      er += *s.er;
    } else {
      has_parts = false;
    }
  }
  const double n = static_cast<double>(losses.size());
  out.count = losses.size();
  out.loss = loss / n;
  out.ld = has_parts ? ld / n : NAN;
  out.er = has_parts ? er / n : NAN;
  for (double &g : out.grad)
    g /= n;
  if (!std::isfinite(out.loss))
    throw NumericalDomain("non-finite batch loss");
}

} // namespace

BatchResult batch_gradient_serial(const Model &model, const Dataset &data,
                                  std::span<const std::size_t> indices) {
  check_inputs(model, data, indices);
  const std::size_t p = model.parameter_count();
  BatchResult out;
  out.grad.assign(p, 0.0);
  Vector sample_grad(p);
  Workspace ws;
  std::vector<SampleLoss> losses;
  losses.reserve(indices.size());
  for (std::size_t i : indices) {
    const Sample &s = data.samples[i];
    losses.push_back(sample_gradient(model, s.features, s.target, sample_grad, ws));
    for (std::size_t j = 0; j < p; ++j)
      out.grad[j] += sample_grad[j];
  }
  finish(out, losses);
  return out;
}

BatchResult batch_gradient_parallel(const Model &model, const Dataset &data,
                                    std::span<const std::size_t> indices,
                                    GradientScratch &scratch) {
  check_inputs(model, data, indices);
  const std::size_t p = model.parameter_count();
  const auto threads = static_cast<std::size_t>(omp_get_max_threads());
  // Rows are buffered a chunk at a time to bound memory on large batches.
  const std::size_t chunk = std::min(indices.size(), std::max<std::size_t>(64, 8 * threads));
  scratch.rows.resize(chunk * p);
  scratch.losses.assign(indices.size(), SampleLoss{});
  scratch.workspaces.resize(threads);

  BatchResult out;
  out.grad.assign(p, 0.0);
  double *grad = out.grad.data();
  const double *rows = scratch.rows.data();
  constexpr std::ptrdiff_t kBlock = 512;
  const auto blocks = (static_cast<std::ptrdiff_t>(p) + kBlock - 1) / kBlock;

  for (std::size_t begin = 0; begin < indices.size(); begin += chunk) {
    const std::size_t count = std::min(chunk, indices.size() - begin);
    // Exceptions may not cross the parallel region boundary.
    std::exception_ptr failure;
#pragma omp parallel
    {
      Workspace &ws = scratch.workspaces[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
      for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(count); ++n) {
        try {
          const std::size_t k = begin + static_cast<std::size_t>(n);
          const Sample &s = data.samples[indices[k]];
          std::span<double> row(scratch.rows.data() + static_cast<std::size_t>(n) * p, p);
          scratch.losses[k] = sample_gradient(model, s.features, s.target, row, ws);
        } catch (...) {
#pragma omp critical
          if (!failure)
            failure = std::current_exception();
        }
      }
    }
    if (failure)
      std::rethrow_exception(failure);

    // Each parameter is summed in sample order, as in the serial kernel.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
      const std::size_t lo = static_cast<std::size_t>(blk * kBlock);
      const std::size_t hi = std::min(p, lo + static_cast<std::size_t>(kBlock));
      for (std::size_t n = 0; n < count; ++n) {
        const double *row = rows + n * p;
        for (std::size_t j = lo; j < hi; ++j)
          grad[j] += row[j];
      }
    }
  }
  finish(out, scratch.losses);
  return out;
}

Vector predict_serial(const Model &model, const Dataset &data) {
  if (data.dim() != model.input_dim())
    throw InvalidArgument("dataset feature length does not match the model input");
  Vector out(data.size());
  Workspace ws;
  for (std::size_t i = 0; i < data.size(); ++i)
    out[i] = predict(model, data.samples[i].features, ws);
  return out;
}

Vector predict_parallel(const Model &model, const Dataset &data) {
  if (data.dim() != model.input_dim())
    throw InvalidArgument("dataset feature length does not match the model input");
  Vector out(data.size());
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  std::exception_ptr failure;
#pragma omp parallel
  {
    Workspace ws;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        out[static_cast<std::size_t>(i)] = predict(model, data.samples[static_cast<std::size_t>(i)].features, ws);
      } catch (...) {
#pragma omp critical
        if (!failure)
          failure = std::current_exception();
      }
    }
  }
  if (failure)
    std::rethrow_exception(failure);
  return out;
}

} // namespace dldl
