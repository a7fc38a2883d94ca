#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace dldl {

struct EvalReport {
  double mae = 0.0;
  double rmse = 0.0;
  /// Absent when either side has zero variance.
  std::optional<double> pearson;
  std::optional<double> epsilon_error;
  std::size_t n = 0;
  /// Samples dropped from the epsilon-error mean because their sigma was not positive.
  std::size_t skipped_sigma = 0;
};

double mae(std::span<const double> preds, std::span<const double> truths);
double rmse(std::span<const double> preds, std::span<const double> truths);
double pearson(std::span<const double> preds, std::span<const double> truths);

/// Mean of 1 - exp(-(y_hat - y)^2 / (2 sigma^2)).
double epsilon_error(std::span<const double> preds, std::span<const double> truths,
                     std::span<const double> sigmas);

/// Builds a report. sigmas may be empty (no epsilon-error); when
/// skip_nonpositive_sigma is set, samples with sigma <= 0 are left out of the
/// epsilon-error mean and counted instead of raising.
EvalReport evaluate(std::span<const double> preds, std::span<const double> truths,
                    std::span<const double> sigmas = {}, bool skip_nonpositive_sigma = false);

} // namespace dldl
