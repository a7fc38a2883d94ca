#include "dldl/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "dldl/errors.hpp"

namespace dldl {

namespace {

constexpr std::array<std::pair<HeadKind, std::string_view>, 7> kHeadNames{{
    {HeadKind::joint, "joint"},
    {HeadKind::dldl, "dldl"},
    {HeadKind::er, "er"},
    {HeadKind::mr_l1, "mr_l1"},
    {HeadKind::mr_l2, "mr_l2"},
    {HeadKind::dex, "dex"},
    {HeadKind::ranking, "ranking"},
}};

bool is_softmax_head(HeadKind kind) {
  return kind == HeadKind::joint || kind == HeadKind::dldl || kind == HeadKind::er ||
         kind == HeadKind::dex;
}

RegressionNorm norm_of(HeadKind kind) {
  return kind == HeadKind::mr_l1 ? RegressionNorm::l1 : RegressionNorm::l2;
}

double log_sum_exp(std::span<const double> x) {
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x)
    s += std::exp(v - m);
  return m + std::log(s);
}

double ranking_logit_inference(std::span<const double> logits, const LabelSpace &space) {
  std::size_t passed = 0;
  for (double v : logits)
    passed += sigmoid(v) > 0.5;
  return space.label(passed);
}

/// acc[r * cols + c] = g[r] * x[c]
void write_outer(std::span<double> acc, std::span<const double> g, std::span<const double> x) {
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < g.size(); ++r) {
    double *a = acc.data() + r * cols;
    const double gr = g[r];
    for (std::size_t c = 0; c < cols; ++c)
      a[c] = gr * x[c];
  }
}

void forward_logits(const Model &model, std::span<const double> x, Workspace &ws) {
  mlp_forward(x, model.backbone, ws.cache);
  const Vector &features = ws.cache.post.back();
  ws.logits.resize(model.head.outputs());
  affine(model.head.weight, model.head.bias, features, ws.logits);
  if (!all_finite(ws.logits))
    throw NumericalDomain("non-finite logits");
}

/// Fills ws.d_logits and returns the loss for the cached forward pass.
SampleLoss head_loss(const Model &model, double y, Workspace &ws, bool want_gradient) {
  const LabelSpace &space = model.space();
  const std::size_t outs = ws.logits.size();
  SampleLoss out;
  if (want_gradient)
    ws.d_logits.resize(outs);
  switch (model.kind) {
  case HeadKind::joint:
  case HeadKind::dldl:
  case HeadKind::er: {
    ws.probs.resize(outs);
    ws.target.resize(outs);
    softmax_into(ws.logits, ws.probs);
    encode_distribution_into(y, model.loss.sigma, space, ws.target);
    const double y_hat = expectation(ws.probs, space);
    const double lse = log_sum_exp(ws.logits);
    double ld = 0.0;
    for (std::size_t k = 0; k < outs; ++k)
      if (ws.target[k] > 0.0)
        ld += ws.target[k] * (std::log(ws.target[k]) - (ws.logits[k] - lse));
    const double er = er_loss(y_hat, y);
    out.ld = ld;
    out.er = er;
    out.loss = (model.loss.distribution_term ? ld : 0.0) + model.loss.lambda * er;
    out.prediction = y_hat;
    if (want_gradient)
      joint_logit_gradient(ws.probs, ws.target, y_hat, y, space, model.loss, ws.d_logits);
    break;
  }
  case HeadKind::dex: {
    ws.probs.resize(outs);
    softmax_into(ws.logits, ws.probs);
    out.loss = dex_loss(ws.logits, y, space);
    out.prediction = expectation(ws.probs, space);
    if (want_gradient)
      dex_logit_gradient(ws.logits, y, space, ws.d_logits);
    break;
  }
  case HeadKind::mr_l1:
  case HeadKind::mr_l2: {
    const double pred = std::tanh(ws.logits[0]);
    const double ys = scale_target(y, space);
    out.loss = mr_loss(pred, ys, norm_of(model.kind));
    out.prediction = mr_inference(pred, space);
    if (want_gradient)
      ws.d_logits[0] = mr_logit_gradient(pred, ys, norm_of(model.kind));
    break;
  }
  case HeadKind::ranking: {
    const RankingVector target = encode_ranking(y, space);
    out.loss = ranking_loss_from_logits(ws.logits, target.values);
    out.prediction = ranking_logit_inference(ws.logits, space);
    if (want_gradient)
      ranking_logit_gradient(ws.logits, target.values, ws.d_logits);
    break;
  }
  }
  return out;
}

} // namespace

std::string_view to_string(HeadKind kind) noexcept {
  for (const auto &[k, name] : kHeadNames)
    if (k == kind)
      return name;
  return "unknown";
}

HeadKind parse_head_kind(std::string_view name) {
  for (const auto &[k, n] : kHeadNames)
    if (n == name)
      return k;
  throw InvalidArgument("unknown head kind '" + std::string(name) + "'");
}

JointLossConfig loss_config_for(HeadKind kind, double lambda, double sigma) {
  if (!(lambda >= 0.0))
    throw InvalidArgument("lambda must be nonnegative");
  if (!(sigma > 0.0))
    throw InvalidArgument("sigma must be positive");
  switch (kind) {
  case HeadKind::dldl:
    return {0.0, sigma, true};
  case HeadKind::er:
    return {lambda, sigma, false};
  default:
    return {lambda, sigma, true};
  }
}

std::size_t head_outputs(HeadKind kind, const LabelSpace &space) {
  switch (kind) {
  case HeadKind::mr_l1:
  case HeadKind::mr_l2:
    return 1;
  case HeadKind::ranking:
    return space.size() - 1;
  default:
    return space.size();
  }
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto &layer : backbone.layers)
    n += layer.weight.data.size() + layer.bias.size();
  return n + head.weight.data.size() + head.bias.size();
}

Vector Model::flatten() const {
  Vector flat;
  flat.reserve(parameter_count());
  for (const auto &layer : backbone.layers) {
    flat.insert(flat.end(), layer.weight.data.begin(), layer.weight.data.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
  }
  flat.insert(flat.end(), head.weight.data.begin(), head.weight.data.end());
  flat.insert(flat.end(), head.bias.begin(), head.bias.end());
  return flat;
}

void Model::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw InvalidArgument("flat parameter vector has the wrong length");
  auto it = flat.begin();
  auto take = [&it](std::vector<double> &dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  for (auto &layer : backbone.layers) {
    take(layer.weight.data);
    take(layer.bias);
  }
  take(head.weight.data);
  take(head.bias);
}

double &Model::parameter(std::size_t index) {
  for (auto &layer : backbone.layers) {
    if (index < layer.weight.data.size())
      return layer.weight.data[index];
    index -= layer.weight.data.size();
    if (index < layer.bias.size())
      return layer.bias[index];
    index -= layer.bias.size();
  }
  if (index < head.weight.data.size())
    return head.weight.data[index];
  index -= head.weight.data.size();
  if (index < head.bias.size())
    return head.bias[index];
  throw InvalidArgument("parameter index out of range");
}

void validate_model(const Model &model) {
  validate_mlp(model.backbone);
  validate_head(model.head, head_outputs(model.kind, model.space()));
  if (model.head.feature_dim() != model.backbone.output_dim())
    throw InvalidArgument("head input does not match backbone output");
  if (!(model.loss.lambda >= 0.0) || !(model.loss.sigma > 0.0))
    throw InvalidArgument("loss configuration out of range");
}

Model make_model(HeadKind kind, const LabelSpace &space, std::span<const std::size_t> dims,
                 double lambda, double sigma, std::uint64_t seed) {
  if (dims.size() < 2)
    throw InvalidArgument("backbone needs at least an input and a feature width");
  std::vector<std::size_t> all(dims.begin(), dims.end());
  all.push_back(head_outputs(kind, space));
  MlpParams stack = init_params(all, seed);
  Model model;
  model.kind = kind;
  model.loss = loss_config_for(kind, lambda, sigma);
  model.head.weight = std::move(stack.layers.back().weight);
  model.head.bias = std::move(stack.layers.back().bias);
  model.head.space = space;
  stack.layers.pop_back();
  model.backbone = std::move(stack);
  return model;
}

SampleLoss sample_loss(const Model &model, std::span<const double> x, double y,
                       Workspace &ws) {
  forward_logits(model, x, ws);
  return head_loss(model, y, ws, false);
}

SampleLoss sample_loss(const Model &model, std::span<const double> x, double y) {
  Workspace ws;
  return sample_loss(model, x, y, ws);
}

void backprop_from_logits(const Model &model, std::span<const double> d_logits,
                          std::span<double> grad, Workspace &ws) {
  if (grad.size() != model.parameter_count() || d_logits.size() != model.head.outputs())
    throw InvalidArgument("gradient buffer does not match the model");
  const std::size_t n = model.backbone.layers.size();
  const std::size_t head_w = model.head.weight.data.size();
  std::size_t offset = grad.size() - head_w - model.head.bias.size();
  const Vector &features = ws.cache.post.back();
  write_outer(grad.subspan(offset, head_w), d_logits, features);
  std::copy(d_logits.begin(), d_logits.end(), grad.begin() + static_cast<std::ptrdiff_t>(offset + head_w));

  ws.d_hidden.resize(features.size());
  transposed_product(model.head.weight, d_logits, ws.d_hidden);
  Vector delta = ws.d_hidden;
  for (std::size_t i = n; i-- > 0;) {
    const auto &layer = model.backbone.layers[i];
    const std::size_t w = layer.weight.data.size();
    offset -= w + layer.bias.size();
    if (i + 1 < n)
      for (std::size_t r = 0; r < delta.size(); ++r)
        if (!(ws.cache.pre[i][r] > 0.0))
          delta[r] = 0.0;
    const Vector &below = i == 0 ? ws.cache.input : ws.cache.post[i - 1];
    write_outer(grad.subspan(offset, w), delta, below);
    std::copy(delta.begin(), delta.end(), grad.begin() + static_cast<std::ptrdiff_t>(offset + w));
    if (i > 0) {
      Vector next(layer.weight.cols);
      transposed_product(layer.weight, delta, next);
      delta = std::move(next);
    }
  }
}

SampleLoss sample_gradient(const Model &model, std::span<const double> x, double y,
                           std::span<double> grad, Workspace &ws) {
  forward_logits(model, x, ws);
  const SampleLoss out = head_loss(model, y, ws, true);
  backprop_from_logits(model, ws.d_logits, grad, ws);
  return out;
}

double predict(const Model &model, std::span<const double> x, Workspace &ws) {
  forward_logits(model, x, ws);
  const LabelSpace &space = model.space();
  if (is_softmax_head(model.kind)) {
    ws.probs.resize(ws.logits.size());
    softmax_into(ws.logits, ws.probs);
    return expectation(ws.probs, space);
  }
  if (model.kind == HeadKind::ranking) {
    return ranking_logit_inference(ws.logits, space);
  }
  return mr_inference(std::tanh(ws.logits[0]), space);
}

double predict(const Model &model, std::span<const double> x) {
  Workspace ws;
  return predict(model, x, ws);
}

Distribution predict_distribution(const Model &model, std::span<const double> x) {
  if (!is_softmax_head(model.kind))
    throw InvalidArgument("head kind '" + std::string(to_string(model.kind)) +
                          "' has no output distribution");
  Workspace ws;
  forward_logits(model, x, ws);
  return softmax(ws.logits, model.space());
}

} // namespace dldl
