#pragma once

#include <span>

#include "dldl/label_codec.hpp"
#include "dldl/linalg.hpp"

namespace dldl {

/// Final linear map x = W f + b, W stored with one row per output.
///
/// The same layout backs every head: K rows for the softmax heads, K-1 rows
/// for the ranking head and a single row for metric regression.
struct HeadParams {
  Matrix weight;
  Vector bias;
  LabelSpace space;

  std::size_t outputs() const noexcept { return weight.rows; }
  std::size_t feature_dim() const noexcept { return weight.cols; }
};

using RankingHeadParams = HeadParams;

/// L = w_ld * L_ld + lambda * L_er.
///
/// DLDL-only is lambda = 0; ER-only drops the distribution term.
struct JointLossConfig {
  double lambda = 1.0;
  double sigma = 2.0;
  bool distribution_term = true;
};

struct HeadGradients {
  Vector d_logits;
  Matrix d_weight;
  Vector d_bias;
  Vector d_features;
};

/// Forward pass record of the joint head.
struct JointForward {
  Vector features;
  double y = 0.0;
  Vector logits;
  Distribution target;
  Distribution pred;
  double y_hat = 0.0;
  double loss = 0.0;
  double ld_loss = 0.0;
  double er_loss = 0.0;
};

void validate_head(const HeadParams &params, std::size_t expected_outputs);

Vector head_forward(std::span<const double> features, const HeadParams &params);

void softmax_into(std::span<const double> logits, std::span<double> out);
Distribution softmax(std::span<const double> logits, const LabelSpace &space);

double expectation(std::span<const double> probs, const LabelSpace &space);
double expectation(const Distribution &dist);

double kl_loss(std::span<const double> target, std::span<const double> pred);
double kl_loss(const Distribution &target, const Distribution &pred);

double er_loss(double y_hat, double y);

double sigmoid(double x) noexcept;

/// sign with sign(0) = 0.
inline double sign_of(double v) noexcept { return (v > 0.0) - (v < 0.0); }

JointForward joint_forward(std::span<const double> features, const HeadParams &params,
                           double y, const JointLossConfig &config);

/// dL/dx = w_ld (p_hat - p) + lambda sign(y_hat - y) p_hat o (l - y_hat).
void joint_logit_gradient(std::span<const double> pred, std::span<const double> target,
                          double y_hat, double y, const LabelSpace &space,
                          const JointLossConfig &config, std::span<double> out);

HeadGradients joint_backward(std::span<const double> features, const HeadParams &params,
                             double y, const JointLossConfig &config,
                             const JointForward &cache);

/// Chain a logit gradient through the linear map.
HeadGradients linear_backward(std::span<const double> features, const HeadParams &params,
                              Vector d_logits);

// Metric regression ---------------------------------------------------------

enum class RegressionNorm { l1, l2 };

/// y -> [-1, 1] affine map of the label range.
double scale_target(double y, const LabelSpace &space) noexcept;
double unscale_target(double scaled, const LabelSpace &space) noexcept;

/// tanh(w . f + b) for a single-row head.
double mr_forward(std::span<const double> features, const HeadParams &params);
double mr_loss(double pred, double y_scaled, RegressionNorm norm) noexcept;
HeadGradients mr_backward(std::span<const double> features, const HeadParams &params,
                          double y_scaled, RegressionNorm norm);
double mr_inference(double pred, const LabelSpace &space) noexcept;

/// d loss / d z for z = w . f + b, given pred = tanh(z).
double mr_logit_gradient(double pred, double y_scaled, RegressionNorm norm) noexcept;

// DEX classification ---------------------------------------------------------

/// Cross-entropy against the nearest grid class of y.
double dex_loss(std::span<const double> logits, double y, const LabelSpace &space);
HeadGradients dex_backward(std::span<const double> features, const HeadParams &params,
                           double y);
double dex_inference(const Distribution &pred);

/// softmax(logits) - onehot(nearest class of y).
void dex_logit_gradient(std::span<const double> logits, double y, const LabelSpace &space,
                        std::span<double> out);

// Ranking --------------------------------------------------------------------

/// Sigmoid outputs of the K-1 jointly trained binary classifiers.
Vector ranking_forward(std::span<const double> features, const RankingHeadParams &params);

/// Sum of binary cross-entropies on sigmoid outputs.
double ranking_loss(std::span<const double> outputs, const RankingVector &target);

/// Same loss evaluated from logits with a stable softplus form.
double ranking_loss_from_logits(std::span<const double> logits,
                                std::span<const double> target);

HeadGradients ranking_backward(std::span<const double> features,
                               const RankingHeadParams &params, double y);

/// sigmoid(logits) - target.
void ranking_logit_gradient(std::span<const double> logits, std::span<const double> target,
                            std::span<double> out);

/// l_{i*}, i* = 1 + #{k : output_k > 0.5} in one-based indexing.
double ranking_inference(std::span<const double> outputs, const LabelSpace &space);

} // namespace dldl
