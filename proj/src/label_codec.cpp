#include "dldl/label_codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dldl/errors.hpp"

namespace dldl {

Vector LabelSpace::labels() const {
  Vector out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = label(i);
  return out;
}

std::size_t LabelSpace::nearest_index(double y) const noexcept {
  const double t = (y - l_min) / step;
  if (!(t > 0.0))
    return 0;
  // ceil(t - 0.5) rounds half-way points down.
  const double idx = std::ceil(t - 0.5);
  if (idx >= static_cast<double>(count - 1))
    return count - 1;
  return static_cast<std::size_t>(idx);
}

LabelSpace make_label_space(double l_min, double l_max, double step) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw InvalidArgument("label step must be positive, got " + std::to_string(step));
  if (!std::isfinite(l_min) || !std::isfinite(l_max) || !(l_max > l_min))
    throw InvalidArgument("label range requires l_max > l_min");
  const double span = (l_max - l_min) / step;
  const double rounded = std::round(span);
  if (std::abs(span - rounded) > 1e-9)
    throw DegenerateGrid("label range is not an integral multiple of the step");
  LabelSpace space;
  space.l_min = l_min;
  space.l_max = l_max;
  space.step = step;
  space.count = static_cast<std::size_t>(rounded) + 1;
  return space;
}

void encode_distribution_into(double y, double sigma, const LabelSpace &space,
                              std::span<double> out) {
  if (!(sigma > 0.0))
    throw InvalidArgument("sigma must be positive");
  if (out.size() != space.size())
    throw InvalidArgument("distribution buffer does not match label space");
  // Subtracting the smallest exponent keeps at least one term at exp(0) = 1,
  // so far out-of-range targets still normalize onto the nearest edge.
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double min_exponent = INFINITY;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double d = space.label(k) - y;
    out[k] = d * d * inv;
    min_exponent = std::min(min_exponent, out[k]);
  }
  double total = 0.0;
  for (double &v : out) {
    v = std::exp(-(v - min_exponent));
    total += v;
  }
  for (double &v : out)
    v /= total;
}

Distribution encode_distribution(double y, double sigma, const LabelSpace &space) {
  Distribution dist;
  dist.space = space;
  dist.probs.resize(space.size());
  encode_distribution_into(y, sigma, space, dist.probs);
  dist.out_of_range = !space.contains(y);
  return dist;
}

double normal_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

CdfVector encode_cdf(double y, double sigma, const LabelSpace &space) {
  if (!(sigma > 0.0))
    throw InvalidArgument("sigma must be positive");
  CdfVector cdf{space, Vector(space.size())};
  for (std::size_t k = 0; k < space.size(); ++k)
    cdf.values[k] = normal_cdf((space.label(k) - y) / sigma);
  return cdf;
}

RankingVector encode_ranking(double y, const LabelSpace &space) {
  if (!space.contains(y))
    throw InvalidArgument("ranking target " + std::to_string(y) +
                          " outside the label range");
  RankingVector rank{space, Vector(space.size() - 1, 0.0)};
  for (std::size_t j = 0; j + 1 < space.size() && space.label(j) < y; ++j)
    rank.values[j] = 1.0;
  return rank;
}

CdfVector cumulate(const Distribution &dist) {
  CdfVector cdf{dist.space, Vector(dist.probs.size())};
  double running = 0.0;
  for (std::size_t k = 0; k < dist.probs.size(); ++k) {
    running += dist.probs[k];
    cdf.values[k] = running;
  }
  return cdf;
}

RankingVector ranking_from_distribution(const Distribution &dist) {
  const CdfVector cdf = cumulate(dist);
  RankingVector rank{dist.space, Vector(dist.probs.size() - 1)};
  for (std::size_t j = 0; j < rank.values.size(); ++j)
    rank.values[j] = std::clamp(1.0 - cdf.values[j], 0.0, 1.0);
  return rank;
}

} // namespace dldl
