#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dldl/model.hpp"

namespace dldl {

/// |a - n| / max(1, |a|, |n|): relative for gradients of magnitude >= 1,
/// absolute below that, where central differences hit their rounding floor.
double gradient_relative_error(double analytic, double numeric) noexcept;

/// Central differences of sample_loss over every flat parameter; returns the
/// largest gradient_relative_error against analytic.
double max_gradient_error(Model &model, std::span<const double> x, double y,
                          std::span<const double> analytic, double h);

/// A random model, input and target drawn for a gradient check.
struct GradcheckCase {
  Model model;
  Vector input;
  double y = 0.0;
  std::size_t feature_dim = 0;
  std::size_t classes = 0;
  double lambda = 0.0;
};

/// Configuration `index` cycles through feature width {4, 16}, grid size
/// {11, 101} and lambda {0, 0.01, 1, 10}. Draws are rejected until the point
/// sits away from the non-smooth spots of the loss: |y_hat - y| and every
/// hidden rectifier input at least `margin` from zero.
GradcheckCase random_gradcheck_case(HeadKind kind, std::size_t index, std::mt19937_64 &rng,
                                    double margin = 1e-3);

struct GradcheckOptions {
  std::size_t configs = 100;
  double h = 1e-6;
  double tolerance = 1e-6;
  std::uint64_t seed = 2024;
  std::vector<HeadKind> heads{HeadKind::joint, HeadKind::dldl,  HeadKind::er,
                              HeadKind::mr_l1, HeadKind::mr_l2, HeadKind::dex,
                              HeadKind::ranking};
};

struct GradcheckReport {
  HeadKind head = HeadKind::joint;
  std::size_t configs = 0;
  double max_error = 0.0;
  bool passed = false;
};

std::vector<GradcheckReport> run_gradcheck(const GradcheckOptions &options);

} // namespace dldl
