#include "dldl/linalg.hpp"

#include <cmath>

namespace dldl {

void affine(const Matrix &weight, std::span<const double> bias,
            std::span<const double> x, std::span<double> out) {
  for (std::size_t r = 0; r < weight.rows; ++r) {
    const double *w = weight.data.data() + r * weight.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < weight.cols; ++c)
      acc += w[c] * x[c];
    out[r] = acc + bias[r];
  }
}

void transposed_product(const Matrix &weight, std::span<const double> g,
                        std::span<double> out) {
  for (std::size_t c = 0; c < weight.cols; ++c)
    out[c] = 0.0;
  for (std::size_t r = 0; r < weight.rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0)
      continue;
    const double *w = weight.data.data() + r * weight.cols;
    for (std::size_t c = 0; c < weight.cols; ++c)
      out[c] += gr * w[c];
  }
}

void add_outer(Matrix &acc, std::span<const double> g, std::span<const double> x) {
  for (std::size_t r = 0; r < acc.rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0)
      continue;
    double *a = acc.data.data() + r * acc.cols;
    for (std::size_t c = 0; c < acc.cols; ++c)
      a[c] += gr * x[c];
  }
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x))
      return false;
  return true;
}

} // namespace dldl
