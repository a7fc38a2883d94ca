#include "dldl/heads.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dldl/errors.hpp"

namespace dldl {

namespace {

constexpr double kLogFloor = 1e-30;

void require_features(std::span<const double> features, const HeadParams &params) {
  if (features.size() != params.feature_dim())
    throw InvalidArgument("feature length " + std::to_string(features.size()) +
                          " does not match head input " +
                          std::to_string(params.feature_dim()));
}

double log_sum_exp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x)
    s += std::exp(v - m);
  return m + std::log(s);
}

/// KL(target || softmax(logits)) through log-softmax, so it stays finite
/// even when a predicted probability underflows.
double kl_from_logits(std::span<const double> target, std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  double loss = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k)
    if (target[k] > 0.0)
      loss += target[k] * (std::log(target[k]) - (logits[k] - lse));
  return loss;
}

double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

} // namespace

double sigmoid(double x) noexcept {
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void validate_head(const HeadParams &params, std::size_t expected_outputs) {
  if (params.weight.rows != expected_outputs)
    throw InvalidArgument("head has " + std::to_string(params.weight.rows) +
                          " outputs, expected " + std::to_string(expected_outputs));
  if (params.bias.size() != params.weight.rows)
    throw InvalidArgument("head bias length does not match weight rows");
  if (!all_finite(params.weight.data) || !all_finite(params.bias))
    throw InvalidArgument("head parameters contain non-finite values");
}

Vector head_forward(std::span<const double> features, const HeadParams &params) {
  require_features(features, params);
  if (params.bias.size() != params.weight.rows)
    throw InvalidArgument("head bias length does not match weight rows");
  Vector logits(params.outputs());
  affine(params.weight, params.bias, features, logits);
  return logits;
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
  if (!all_finite(logits))
    throw InvalidArgument("softmax input contains non-finite values");
  const double m = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - m);
    total += out[k];
  }
  for (std::size_t k = 0; k < logits.size(); ++k)
    out[k] /= total;
}

Distribution softmax(std::span<const double> logits, const LabelSpace &space) {
  if (logits.size() != space.size())
    throw InvalidArgument("logit count does not match label space");
  Distribution dist{space, Vector(logits.size())};
  softmax_into(logits, dist.probs);
  return dist;
}

double expectation(std::span<const double> probs, const LabelSpace &space) {
  double y_hat = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k)
    y_hat += probs[k] * space.label(k);
  // Rounding can push a one-hot expectation a hair past the grid ends.
  return std::clamp(y_hat, space.l_min, space.l_max);
}

double expectation(const Distribution &dist) { return expectation(dist.probs, dist.space); }

double kl_loss(std::span<const double> target, std::span<const double> pred) {
  if (target.size() != pred.size())
    throw InvalidArgument("KL operands differ in length");
  double loss = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    if (target[k] <= 0.0)
      continue;
    if (pred[k] == 0.0)
      throw NumericalDomain("predicted probability is exactly zero where the target has mass");
    loss += target[k] * (std::log(target[k]) - std::log(std::max(pred[k], kLogFloor)));
  }
  return loss;
}

double kl_loss(const Distribution &target, const Distribution &pred) {
  if (!(target.space == pred.space))
    throw InvalidArgument("KL operands live on different label spaces");
  return kl_loss(target.probs, pred.probs);
}

double er_loss(double y_hat, double y) { return std::abs(y_hat - y); }

JointForward joint_forward(std::span<const double> features, const HeadParams &params,
                           double y, const JointLossConfig &config) {
  if (!(config.lambda >= 0.0))
    throw InvalidArgument("lambda must be nonnegative");
  validate_head(params, params.space.size());
  JointForward fw;
  fw.features.assign(features.begin(), features.end());
  fw.y = y;
  fw.logits = head_forward(features, params);
  fw.target = encode_distribution(y, config.sigma, params.space);
  fw.pred = softmax(fw.logits, params.space);
  fw.y_hat = expectation(fw.pred);
  fw.ld_loss = kl_from_logits(fw.target.probs, fw.logits);
  fw.er_loss = er_loss(fw.y_hat, y);
  fw.loss = (config.distribution_term ? fw.ld_loss : 0.0) + config.lambda * fw.er_loss;
  return fw;
}

void joint_logit_gradient(std::span<const double> pred, std::span<const double> target,
                          double y_hat, double y, const LabelSpace &space,
                          const JointLossConfig &config, std::span<double> out) {
  const double er_scale = config.lambda * sign_of(y_hat - y);
  for (std::size_t k = 0; k < pred.size(); ++k) {
    double g = config.distribution_term ? pred[k] - target[k] : 0.0;
    g += er_scale * pred[k] * (space.label(k) - y_hat);
    out[k] = g;
  }
}

HeadGradients joint_backward(std::span<const double> features, const HeadParams &params,
                             double y, const JointLossConfig &config,
                             const JointForward &cache) {
  if (cache.y != y || cache.features.size() != features.size() ||
      !std::equal(features.begin(), features.end(), cache.features.begin()) ||
      cache.pred.probs.size() != params.outputs())
    throw InvalidArgument("forward cache does not match backward inputs");
  Vector d_logits(params.outputs());
  joint_logit_gradient(cache.pred.probs, cache.target.probs, cache.y_hat, y,
                       params.space, config, d_logits);
  return linear_backward(features, params, std::move(d_logits));
}

HeadGradients linear_backward(std::span<const double> features, const HeadParams &params,
                              Vector d_logits) {
  require_features(features, params);
  if (d_logits.size() != params.outputs())
    throw InvalidArgument("logit gradient length does not match head outputs");
  HeadGradients g;
  g.d_weight = Matrix(params.weight.rows, params.weight.cols);
  add_outer(g.d_weight, d_logits, features);
  g.d_bias = d_logits;
  g.d_features.resize(params.feature_dim());
  transposed_product(params.weight, d_logits, g.d_features);
  g.d_logits = std::move(d_logits);
  return g;
}

// Metric regression ---------------------------------------------------------

double scale_target(double y, const LabelSpace &space) noexcept {
  return 2.0 * (y - space.l_min) / (space.l_max - space.l_min) - 1.0;
}

double unscale_target(double scaled, const LabelSpace &space) noexcept {
  return space.l_min + 0.5 * (scaled + 1.0) * (space.l_max - space.l_min);
}

double mr_forward(std::span<const double> features, const HeadParams &params) {
  validate_head(params, 1);
  return std::tanh(head_forward(features, params)[0]);
}

double mr_loss(double pred, double y_scaled, RegressionNorm norm) noexcept {
  const double diff = pred - y_scaled;
  return norm == RegressionNorm::l2 ? diff * diff : std::abs(diff);
}

HeadGradients mr_backward(std::span<const double> features, const HeadParams &params,
                          double y_scaled, RegressionNorm norm) {
  const double pred = mr_forward(features, params);
  return linear_backward(features, params, Vector{mr_logit_gradient(pred, y_scaled, norm)});
}

double mr_logit_gradient(double pred, double y_scaled, RegressionNorm norm) noexcept {
  const double diff = pred - y_scaled;
  const double d_pred = norm == RegressionNorm::l2 ? 2.0 * diff : sign_of(diff);
  return d_pred * (1.0 - pred * pred);
}

double mr_inference(double pred, const LabelSpace &space) noexcept {
  return unscale_target(pred, space);
}

// DEX classification ---------------------------------------------------------

double dex_loss(std::span<const double> logits, double y, const LabelSpace &space) {
  if (logits.size() != space.size())
    throw InvalidArgument("logit count does not match label space");
  if (!all_finite(logits))
    throw InvalidArgument("logits contain non-finite values");
  const std::size_t cls = space.nearest_index(y);
  return log_sum_exp(logits) - logits[cls];
}

HeadGradients dex_backward(std::span<const double> features, const HeadParams &params,
                           double y) {
  validate_head(params, params.space.size());
  Vector d_logits(params.outputs());
  dex_logit_gradient(head_forward(features, params), y, params.space, d_logits);
  return linear_backward(features, params, std::move(d_logits));
}

void dex_logit_gradient(std::span<const double> logits, double y, const LabelSpace &space,
                        std::span<double> out) {
  softmax_into(logits, out);
  out[space.nearest_index(y)] -= 1.0;
}

double dex_inference(const Distribution &pred) { return expectation(pred); }

// Ranking --------------------------------------------------------------------

Vector ranking_forward(std::span<const double> features, const RankingHeadParams &params) {
  validate_head(params, params.space.size() - 1);
  Vector out = head_forward(features, params);
  for (double &v : out)
    v = sigmoid(v);
  return out;
}

double ranking_loss(std::span<const double> outputs, const RankingVector &target) {
  if (outputs.size() != target.values.size())
    throw InvalidArgument("ranking outputs do not match target length");
  double loss = 0.0;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    const double o = outputs[k];
    const double t = target.values[k];
    loss -= t * std::log(std::max(o, kLogFloor)) +
            (1.0 - t) * std::log(std::max(1.0 - o, kLogFloor));
  }
  return loss;
}

double ranking_loss_from_logits(std::span<const double> logits,
                                std::span<const double> target) {
  if (logits.size() != target.size())
    throw InvalidArgument("ranking logits do not match target length");
  double loss = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k)
    loss += softplus(logits[k]) - target[k] * logits[k];
  return loss;
}

HeadGradients ranking_backward(std::span<const double> features,
                               const RankingHeadParams &params, double y) {
  validate_head(params, params.space.size() - 1);
  const Vector logits = head_forward(features, params);
  const RankingVector target = encode_ranking(y, params.space);
  Vector d_logits(logits.size());
  ranking_logit_gradient(logits, target.values, d_logits);
  return linear_backward(features, params, std::move(d_logits));
}

void ranking_logit_gradient(std::span<const double> logits, std::span<const double> target,
                            std::span<double> out) {
  for (std::size_t k = 0; k < logits.size(); ++k)
    out[k] = sigmoid(logits[k]) - target[k];
}

double ranking_inference(std::span<const double> outputs, const LabelSpace &space) {
  std::size_t passed = 0;
  for (double o : outputs)
    passed += o > 0.5;
  return space.label(passed);
}

} // namespace dldl
