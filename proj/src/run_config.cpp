#include "dldl/run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dldl/errors.hpp"

namespace dldl {

using nlohmann::json;

namespace {

template <typename T> void read_opt(const json &j, const char *key, T &dst) {
  if (j.contains(key))
    dst = j.at(key).get<T>();
}

double parse_override(const std::string &text, const std::string &variant) {
  double v = 0.0;
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  if (!(in >> v) || !in.eof())
    throw InvalidArgument("bad numeric override in head variant '" + variant + "'");
  return v;
}

} // namespace

std::string config_to_json(const RunConfig &c) {
  json j;
  j["head"] = std::string(to_string(c.head));
  j["heads"] = c.heads;
  j["lambda"] = c.lambda;
  j["sigma"] = c.sigma;
  j["label_space"] = {{"l_min", c.l_min}, {"l_max", c.l_max}, {"step", c.step}};
  j["backbone_dims"] = c.backbone_dims;
  j["optimizer"] = {{"base_lr", c.base_lr}, {"epochs", c.epochs}, {"batch_size", c.batch_size},
                    {"beta1", c.beta1},     {"beta2", c.beta2},   {"epsilon", c.epsilon}};
  json synth = {{"n", c.synthetic.n},
                {"dim", c.synthetic.dim},
                {"noise_std", c.synthetic.noise_std},
                {"curve", c.synthetic.curve},
                {"seed", c.synthetic.seed}};
  synth["label_sigma"] = c.synthetic.label_sigma ? json(*c.synthetic.label_sigma) : json(nullptr);
  j["data"] = {{"source", c.data_source},
               {"csv_path", c.csv_path},
               {"test_csv_path", c.test_csv_path},
               {"synthetic", synth}};
  j["split_fraction"] = c.split_fraction;
  j["split_seed"] = c.split_seed;
  j["seeds"] = c.seeds;
  j["parallel"] = c.parallel;
  j["output"] = c.output;
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), 1);
  }
  RunConfig c;
  try {
    if (j.contains("head"))
      c.head = parse_head_kind(j.at("head").get<std::string>());
    read_opt(j, "heads", c.heads);
    read_opt(j, "lambda", c.lambda);
    read_opt(j, "sigma", c.sigma);
    if (j.contains("label_space")) {
      const json &ls = j.at("label_space");
      read_opt(ls, "l_min", c.l_min);
      read_opt(ls, "l_max", c.l_max);
      read_opt(ls, "step", c.step);
    }
    read_opt(j, "backbone_dims", c.backbone_dims);
    if (j.contains("optimizer")) {
      const json &o = j.at("optimizer");
      read_opt(o, "base_lr", c.base_lr);
      read_opt(o, "epochs", c.epochs);
      read_opt(o, "batch_size", c.batch_size);
      read_opt(o, "beta1", c.beta1);
      read_opt(o, "beta2", c.beta2);
      read_opt(o, "epsilon", c.epsilon);
    }
    if (j.contains("data")) {
      const json &d = j.at("data");
      read_opt(d, "source", c.data_source);
      read_opt(d, "csv_path", c.csv_path);
      read_opt(d, "test_csv_path", c.test_csv_path);
      if (d.contains("synthetic")) {
        const json &s = d.at("synthetic");
        read_opt(s, "n", c.synthetic.n);
        read_opt(s, "dim", c.synthetic.dim);
        read_opt(s, "noise_std", c.synthetic.noise_std);
        read_opt(s, "curve", c.synthetic.curve);
        read_opt(s, "seed", c.synthetic.seed);
        if (s.contains("label_sigma")) {
          if (s.at("label_sigma").is_null())
            c.synthetic.label_sigma.reset();
          else
            c.synthetic.label_sigma = s.at("label_sigma").get<double>();
        }
      }
    }
    read_opt(j, "split_fraction", c.split_fraction);
    read_opt(j, "split_seed", c.split_seed);
    read_opt(j, "seeds", c.seeds);
    read_opt(j, "parallel", c.parallel);
    read_opt(j, "output", c.output);
  } catch (const json::exception &e) {
    throw InvalidArgument(std::string("malformed config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidArgument("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

LabelSpace label_space_of(const RunConfig &config) {
  return make_label_space(config.l_min, config.l_max, config.step);
}

void validate_config(const RunConfig &c) {
  label_space_of(c);
  loss_config_for(c.head, c.lambda, c.sigma);
  if (c.backbone_dims.size() < 2)
    throw InvalidArgument("backbone_dims needs an input and a feature width");
  for (std::size_t w : c.backbone_dims)
    if (w == 0)
      throw InvalidArgument("backbone widths must be positive");
  if (!(c.base_lr > 0.0) || c.batch_size == 0)
    throw InvalidArgument("optimizer needs base_lr > 0 and batch_size > 0");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0) ||
      !(c.epsilon > 0.0))
    throw InvalidArgument("Adam betas must lie in [0, 1) and epsilon must be positive");
  if (c.data_source != "synthetic" && c.data_source != "csv")
    throw InvalidArgument("data.source must be 'synthetic' or 'csv'");
  if (c.data_source == "csv" && c.csv_path.empty())
    throw InvalidArgument("data.csv_path is required for csv data");
  if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0))
    throw InvalidArgument("split_fraction must lie in (0, 1)");
  if (c.seeds.empty())
    throw InvalidArgument("at least one seed is required");
  for (const auto &h : c.heads)
    parse_head_variant(h);
}

TrainOptions train_options_of(const RunConfig &c, std::uint64_t seed) {
  TrainOptions o;
  o.epochs = c.epochs;
  o.batch_size = c.batch_size;
  o.base_lr = c.base_lr;
  o.beta1 = c.beta1;
  o.beta2 = c.beta2;
  o.epsilon = c.epsilon;
  o.seed = seed;
  o.parallel = c.parallel;
  return o;
}

HeadVariant parse_head_variant(const std::string &text) {
  HeadVariant v;
  v.label = text;
  std::size_t colon = text.find(':');
  v.head = parse_head_kind(text.substr(0, colon));
  while (colon != std::string::npos) {
    const std::size_t next = text.find(':', colon + 1);
    const std::string item = text.substr(colon + 1, next - colon - 1);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("head variant override '" + item + "' must be key=value");
    const std::string key = item.substr(0, eq);
    const double value = parse_override(item.substr(eq + 1), text);
    if (key == "lambda")
      v.lambda = value;
    else if (key == "sigma")
      v.sigma = value;
    else if (key == "step")
      v.step = value;
    else
      throw InvalidArgument("unknown head variant override '" + key + "'");
    colon = next;
  }
  return v;
}

std::pair<Dataset, Dataset> load_data(const RunConfig &c, const LabelSpace &space) {
  if (c.data_source == "synthetic") {
    Dataset all = gen_synthetic(c.synthetic, space);
    return split(all, c.split_fraction, c.split_seed);
  }
  Dataset all = load_csv(c.csv_path, space);
  validate_dataset(all);
  if (!c.test_csv_path.empty()) {
    Dataset test = load_csv(c.test_csv_path, space);
    validate_dataset(test);
    return {std::move(all), std::move(test)};
  }
  return split(all, c.split_fraction, c.split_seed);
}

} // namespace dldl
