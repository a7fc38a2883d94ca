#include "dldl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dldl/errors.hpp"

namespace dldl {

namespace {

void require_pair(std::span<const double> preds, std::span<const double> truths) {
  if (preds.empty())
    throw InvalidArgument("metrics need at least one sample");
  if (preds.size() != truths.size())
    throw InvalidArgument("prediction and truth lengths differ");
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

} // namespace

double mae(std::span<const double> preds, std::span<const double> truths) {
  require_pair(preds, truths);
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    s += std::abs(preds[i] - truths[i]);
  return s / static_cast<double>(preds.size());
}

double rmse(std::span<const double> preds, std::span<const double> truths) {
  require_pair(preds, truths);
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - truths[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(preds.size()));
}

double pearson(std::span<const double> preds, std::span<const double> truths) {
  require_pair(preds, truths);
  const double mp = mean(preds);
  const double mt = mean(truths);
  double cov = 0.0, vp = 0.0, vt = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double dp = preds[i] - mp;
    const double dt = truths[i] - mt;
    cov += dp * dt;
    vp += dp * dp;
    vt += dt * dt;
  }
  if (vp == 0.0 || vt == 0.0)
    throw DegenerateInput("pearson correlation is undefined for a constant vector");
  const double r = cov / (std::sqrt(vp) * std::sqrt(vt));
  return std::max(-1.0, std::min(1.0, r));
}

double epsilon_error(std::span<const double> preds, std::span<const double> truths,
                     std::span<const double> sigmas) {
  require_pair(preds, truths);
  if (sigmas.size() != preds.size())
    throw InvalidArgument("sigma count does not match predictions");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!(sigmas[i] > 0.0))
      throw InvalidArgument("epsilon-error needs every sigma > 0 (sample " +
                            std::to_string(i) + ")");
    const double d = preds[i] - truths[i];
    s += 1.0 - std::exp(-d * d / (2.0 * sigmas[i] * sigmas[i]));
  }
  return s / static_cast<double>(preds.size());
}

EvalReport evaluate(std::span<const double> preds, std::span<const double> truths,
                    std::span<const double> sigmas, bool skip_nonpositive_sigma) {
  EvalReport report;
  report.n = preds.size();
  report.mae = mae(preds, truths);
  report.rmse = rmse(preds, truths);
  try {
    report.pearson = pearson(preds, truths);
  } catch (const DegenerateInput &) {
    report.pearson.reset();
  }
  if (sigmas.empty())
    return report;
  if (!skip_nonpositive_sigma) {
    report.epsilon_error = epsilon_error(preds, truths, sigmas);
    return report;
  }
  std::vector<double> p, t, s;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (sigmas[i] > 0.0) {
      p.push_back(preds[i]);
      t.push_back(truths[i]);
      s.push_back(sigmas[i]);
    } else {
      ++report.skipped_sigma;
    }
  }
  if (!p.empty())
    report.epsilon_error = epsilon_error(p, t, s);
  return report;
}

} // namespace dldl
