#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dldl/backbone.hpp"
#include "dldl/heads.hpp"
#include "dldl/label_codec.hpp"

namespace dldl {

enum class HeadKind { joint, dldl, er, mr_l1, mr_l2, dex, ranking };

std::string_view to_string(HeadKind kind) noexcept;
HeadKind parse_head_kind(std::string_view name);

/// Loss configuration a head kind trains with. DLDL-only and ER-only are
/// special cases of the joint loss, so all three share one code path.
JointLossConfig loss_config_for(HeadKind kind, double lambda, double sigma);

/// Output units of the final linear map for a head kind.
std::size_t head_outputs(HeadKind kind, const LabelSpace &space);

/// Backbone plus head. Parameters flatten in the order: each backbone layer's
/// weight (row-major) then bias, then the head weight and bias.
struct Model {
  HeadKind kind = HeadKind::joint;
  JointLossConfig loss;
  MlpParams backbone;
  HeadParams head;

  const LabelSpace &space() const noexcept { return head.space; }
  std::size_t input_dim() const { return backbone.input_dim(); }
  std::size_t parameter_count() const;
  Vector flatten() const;
  void assign(std::span<const double> flat);
  /// Flat-order access to one parameter.
  double &parameter(std::size_t index);

  bool operator==(const Model &other) const {
    return kind == other.kind && backbone == other.backbone &&
           head.weight == other.head.weight && head.bias == other.head.bias &&
           head.space == other.head.space && loss.lambda == other.loss.lambda &&
           loss.sigma == other.loss.sigma &&
           loss.distribution_term == other.loss.distribution_term;
  }
};

void validate_model(const Model &model);

/// dims covers the backbone only, input first; the head width follows from
/// the kind and label space. One seeded stream initializes every layer.
Model make_model(HeadKind kind, const LabelSpace &space, std::span<const std::size_t> dims,
                 double lambda, double sigma, std::uint64_t seed);

struct SampleLoss {
  double loss = 0.0;
  /// Distribution and expectation terms; only meaningful for softmax heads.
  std::optional<double> ld;
  std::optional<double> er;
  double prediction = 0.0;
};

/// Reusable per-thread buffers for the sample kernels.
struct Workspace {
  MlpCache cache;
  Vector logits;
  Vector probs;
  Vector target;
  Vector d_logits;
  Vector d_hidden;
};

/// Forward pass only.
SampleLoss sample_loss(const Model &model, std::span<const double> x, double y,
                       Workspace &ws);
SampleLoss sample_loss(const Model &model, std::span<const double> x, double y);

/// Forward and backward pass; overwrites grad (length parameter_count()).
SampleLoss sample_gradient(const Model &model, std::span<const double> x, double y,
                           std::span<double> grad, Workspace &ws);

/// Chains an arbitrary logit gradient back through head and backbone.
/// ws must hold the forward cache of x.
void backprop_from_logits(const Model &model, std::span<const double> d_logits,
                          std::span<double> grad, Workspace &ws);

/// Point prediction for one input.
double predict(const Model &model, std::span<const double> x, Workspace &ws);
double predict(const Model &model, std::span<const double> x);

/// Head output distribution for softmax heads.
Distribution predict_distribution(const Model &model, std::span<const double> x);

} // namespace dldl
