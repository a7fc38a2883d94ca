#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dldl/linalg.hpp"

namespace dldl {

/// Evenly spaced ordered label grid [l_min : step : l_max].
///
/// Labels are computed as l_min + i * step rather than stored, so a space is
/// cheap to copy and never accumulates drift on fractional steps.
struct LabelSpace {
  double l_min = 0.0;
  double l_max = 1.0;
  double step = 1.0;
  std::size_t count = 2; // K

  std::size_t size() const noexcept { return count; }
  double label(std::size_t i) const noexcept {
    return i + 1 == count ? l_max : l_min + static_cast<double>(i) * step;
  }
  Vector labels() const;

  /// Nearest grid index to y, ties toward the lower index, clamped to the grid.
  std::size_t nearest_index(double y) const noexcept;
  bool contains(double y) const noexcept { return y >= l_min && y <= l_max; }

  bool operator==(const LabelSpace &) const = default;
};

LabelSpace make_label_space(double l_min, double l_max, double step);

/// Probability vector over a label space.
struct Distribution {
  LabelSpace space;
  Vector probs;
  /// Set when built from a target outside [l_min, l_max].
  bool out_of_range = false;
};

/// Cumulative values over a label space, length K.
struct CdfVector {
  LabelSpace space;
  Vector values;
};

/// Ordinal threshold encoding, length K-1.
struct RankingVector {
  LabelSpace space;
  Vector values;
};

/// Discretized normal density centred at y, renormalized to sum to one.
Distribution encode_distribution(double y, double sigma, const LabelSpace &space);

/// In-place variant used by the training kernels; out.size() must equal K.
void encode_distribution_into(double y, double sigma, const LabelSpace &space,
                              std::span<double> out);

/// Closed-form normal c.d.f. sampled on the grid.
CdfVector encode_cdf(double y, double sigma, const LabelSpace &space);

/// Exact ranking encoding: entry j is 1 iff label(j) < y.
RankingVector encode_ranking(double y, const LabelSpace &space);

/// Running prefix sum, i.e. the product with the triangular ones matrix.
CdfVector cumulate(const Distribution &dist);

/// 1 - cumulate(dist), first K-1 entries, clipped to [0, 1].
RankingVector ranking_from_distribution(const Distribution &dist);

/// Standard normal c.d.f.
double normal_cdf(double z) noexcept;

} // namespace dldl
