#include "dldl/gradcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dldl/errors.hpp"

namespace dldl {

double gradient_relative_error(double analytic, double numeric) noexcept {
  const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

double max_gradient_error(Model &model, std::span<const double> x, double y,
                          std::span<const double> analytic, double h) {
  if (analytic.size() != model.parameter_count())
    throw InvalidArgument("analytic gradient length does not match the model");
  Workspace ws;
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    double &p = model.parameter(i);
    const double saved = p;
    p = saved + h;
    const double up = sample_loss(model, x, y, ws).loss;
    p = saved - h;
    const double down = sample_loss(model, x, y, ws).loss;
    p = saved;
    worst = std::max(worst, gradient_relative_error(analytic[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

namespace {

bool near_kink(const Model &model, std::span<const double> x, double y, double margin) {
  Workspace ws;
  const SampleLoss s = sample_loss(model, x, y, ws);
  for (std::size_t i = 0; i + 1 < ws.cache.pre.size(); ++i)
    for (double z : ws.cache.pre[i])
      if (std::abs(z) < margin)
        return true;
  switch (model.kind) {
  case HeadKind::joint:
  case HeadKind::dldl:
  case HeadKind::er:
    return std::abs(s.prediction - y) < margin;
  case HeadKind::mr_l1:
    return std::abs(std::tanh(ws.logits[0]) - scale_target(y, model.space())) < margin;
  default:
    return false;
  }
}

} // namespace

GradcheckCase random_gradcheck_case(HeadKind kind, std::size_t index, std::mt19937_64 &rng,
                                    double margin) {
  constexpr std::array<std::size_t, 2> kFeatureDims{4, 16};
  constexpr std::array<std::size_t, 2> kClasses{11, 101};
  constexpr std::array<double, 4> kLambdas{0.0, 0.01, 1.0, 10.0};
  constexpr std::size_t kInputDim = 6;
  constexpr std::size_t kHidden = 8;

  GradcheckCase c;
  c.feature_dim = kFeatureDims[index % 2];
  c.classes = kClasses[(index / 2) % 2];
  c.lambda = kLambdas[(index / 4) % 4];
  const LabelSpace space = make_label_space(0.0, static_cast<double>(c.classes - 1), 1.0);
  const std::array<std::size_t, 3> dims{kInputDim, kHidden, c.feature_dim};
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> target(space.l_min, space.l_max);
  for (;;) {
    c.model = make_model(kind, space, dims, c.lambda, 2.0, rng());
    for (auto &layer : c.model.backbone.layers)
      for (double &b : layer.bias)
        b = 0.1 * normal(rng);
    for (double &b : c.model.head.bias)
      b = 0.1 * normal(rng);
    c.input.resize(kInputDim);
    for (double &v : c.input)
      v = normal(rng);
    c.y = target(rng);
    if (!near_kink(c.model, c.input, c.y, margin))
      return c;
  }
}

std::vector<GradcheckReport> run_gradcheck(const GradcheckOptions &options) {
  if (!(options.h > 0.0) || options.configs == 0)
    throw InvalidArgument("gradcheck needs h > 0 and at least one configuration");
  std::vector<GradcheckReport> reports;
  for (HeadKind kind : options.heads) {
    std::mt19937_64 rng(options.seed);
    GradcheckReport report;
    report.head = kind;
    Workspace ws;
    for (std::size_t i = 0; i < options.configs; ++i) {
      GradcheckCase c = random_gradcheck_case(kind, i, rng);
      Vector grad(c.model.parameter_count());
      sample_gradient(c.model, c.input, c.y, grad, ws);
      report.max_error =
          std::max(report.max_error, max_gradient_error(c.model, c.input, c.y, grad, options.h));
      ++report.configs;
    }
    report.passed = report.max_error < options.tolerance;
    reports.push_back(report);
  }
  return reports;
}

} // namespace dldl
