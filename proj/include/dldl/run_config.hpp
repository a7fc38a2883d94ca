#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dldl/data.hpp"
#include "dldl/model.hpp"
#include "dldl/trainer.hpp"

namespace dldl {

/// One experiment, as read from and written to JSON.
///
/// Schema (all fields optional, defaults shown by RunConfig{}):
///
///   head            "joint" | "dldl" | "er" | "mr_l1" | "mr_l2" | "dex" | "ranking"
///   heads           list of head variants for `compare`; a variant is a head
///                   name optionally followed by ":lambda=v", ":sigma=v" or
///                   ":step=v" overrides, e.g. "joint:lambda=0.1"
///   lambda, sigma   joint loss weight and target spread
///   label_space     {l_min, l_max, step}
///   backbone_dims   backbone widths, input first
///   optimizer       {base_lr, epochs, batch_size, beta1, beta2, epsilon}
///   data            {source: "synthetic" | "csv", csv_path, test_csv_path,
///                    synthetic: {n, dim, noise_std, curve, label_sigma, seed}}
///   split_fraction  train share when no test_csv_path is given
///   split_seed      seed of the train/test shuffle
///   seeds           model seeds; `train` uses the first
///   parallel        use the OpenMP kernels
///   output          output directory
struct RunConfig {
  HeadKind head = HeadKind::joint;
  std::vector<std::string> heads{"joint", "dldl", "er", "mr_l2", "dex"};
  double lambda = 1.0;
  double sigma = 2.0;
  double l_min = 0.0;
  double l_max = 100.0;
  double step = 1.0;
  std::vector<std::size_t> backbone_dims{16, 64, 64};
  double base_lr = 1e-3;
  std::size_t epochs = 60;
  std::size_t batch_size = 64;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::string data_source = "synthetic";
  std::string csv_path;
  std::string test_csv_path;
  SynthConfig synthetic;
  double split_fraction = 0.8;
  std::uint64_t split_seed = 7;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  bool parallel = true;
  std::string output = "out";

  bool operator==(const RunConfig &) const = default;
};

std::string config_to_json(const RunConfig &config);
RunConfig config_from_json(const std::string &text);
RunConfig load_config(const std::filesystem::path &path);

/// Checks cross-field constraints; throws InvalidArgument.
void validate_config(const RunConfig &config);

LabelSpace label_space_of(const RunConfig &config);
TrainOptions train_options_of(const RunConfig &config, std::uint64_t seed);

/// A compare row: head kind plus per-variant overrides.
struct HeadVariant {
  std::string label;
  HeadKind head = HeadKind::joint;
  std::optional<double> lambda;
  std::optional<double> sigma;
  std::optional<double> step;
};

HeadVariant parse_head_variant(const std::string &text);

/// Train/test sets for a config: generated or loaded, then split unless a
/// separate test file is named.
std::pair<Dataset, Dataset> load_data(const RunConfig &config, const LabelSpace &space);

} // namespace dldl
