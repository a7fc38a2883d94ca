#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dldl {

using Vector = std::vector<double>;

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }

  bool operator==(const Matrix &) const = default;
};

/// out = W * x + b
void affine(const Matrix &weight, std::span<const double> bias,
            std::span<const double> x, std::span<double> out);

/// out = W^T * g
void transposed_product(const Matrix &weight, std::span<const double> g,
                        std::span<double> out);

/// W += g * x^T
void add_outer(Matrix &acc, std::span<const double> g, std::span<const double> x);

bool all_finite(std::span<const double> v);

} // namespace dldl
