#include "dldl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dldl/errors.hpp"

namespace dldl {

using nlohmann::json;

namespace {

json matrix_json(const Matrix &w, const Vector &b) {
  return json{{"rows", w.rows}, {"cols", w.cols}, {"weight", w.data}, {"bias", b}};
}

void read_matrix(const json &j, Matrix &w, Vector &b) {
  w.rows = j.at("rows").get<std::size_t>();
  w.cols = j.at("cols").get<std::size_t>();
  w.data = j.at("weight").get<std::vector<double>>();
  b = j.at("bias").get<std::vector<double>>();
  if (w.data.size() != w.rows * w.cols || b.size() != w.rows)
    throw InvalidArgument("checkpoint matrix storage does not match its shape");
}

} // namespace

std::string checkpoint_to_string(const Checkpoint &ckpt) {
  const Model &m = ckpt.model;
  json j;
  j["format"] = "dldl-checkpoint";
  j["version"] = kCheckpointVersion;
  j["head"] = std::string(to_string(m.kind));
  j["loss"] = {{"lambda", m.loss.lambda},
               {"sigma", m.loss.sigma},
               {"distribution_term", m.loss.distribution_term}};
  j["label_space"] = {{"l_min", m.space().l_min}, {"l_max", m.space().l_max},
                      {"step", m.space().step}};
  j["seed"] = ckpt.seed;
  j["dims"] = m.backbone.dims();
  json layers = json::array();
  for (const auto &layer : m.backbone.layers)
    layers.push_back(matrix_json(layer.weight, layer.bias));
  j["backbone"] = std::move(layers);
  j["head_params"] = matrix_json(m.head.weight, m.head.bias);
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what(), 1);
  }
  try {
    if (j.at("format") != "dldl-checkpoint")
      throw InvalidArgument("not a dldl checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw InvalidArgument("unsupported checkpoint version " + j.at("version").dump());
    Checkpoint ckpt;
    Model &m = ckpt.model;
    m.kind = parse_head_kind(j.at("head").get<std::string>());
    const json &loss = j.at("loss");
    m.loss.lambda = loss.at("lambda").get<double>();
    m.loss.sigma = loss.at("sigma").get<double>();
    m.loss.distribution_term = loss.at("distribution_term").get<bool>();
    const json &ls = j.at("label_space");
    m.head.space = make_label_space(ls.at("l_min").get<double>(), ls.at("l_max").get<double>(),
                                    ls.at("step").get<double>());
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    for (const json &layer : j.at("backbone")) {
      DenseLayer d;
      read_matrix(layer, d.weight, d.bias);
      m.backbone.layers.push_back(std::move(d));
    }
    read_matrix(j.at("head_params"), m.head.weight, m.head.bias);
    if (m.backbone.dims() != j.at("dims").get<std::vector<std::size_t>>())
      throw InvalidArgument("checkpoint dims do not match its layers");
    validate_model(m);
    return ckpt;
  } catch (const json::exception &e) {
    throw InvalidArgument(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InvalidArgument("cannot write " + path.string());
  out << checkpoint_to_string(ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidArgument("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

} // namespace dldl
