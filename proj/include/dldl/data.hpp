#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dldl/label_codec.hpp"
#include "dldl/linalg.hpp"

namespace dldl {

struct Sample {
  Vector features;
  double target = 0.0;
  std::optional<double> sigma;
};

struct Dataset {
  std::vector<Sample> samples;
  LabelSpace space;
  std::string provenance;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  std::size_t dim() const noexcept { return samples.empty() ? 0 : samples.front().features.size(); }
  /// True when every sample carries a sigma.
  bool has_sigma() const noexcept;
  std::size_t out_of_range_count() const noexcept;

  Vector targets() const;
  Vector sigmas() const;
};

/// Throws InvalidArgument on an empty set, ragged features, non-finite
/// entries or a non-positive sigma.
void validate_dataset(const Dataset &data);

struct SynthConfig {
  std::size_t n = 2000;
  std::size_t dim = 16;
  double noise_std = 0.05;
  std::string curve = "sinusoid";
  std::optional<double> label_sigma = 2.0;
  std::uint64_t seed = 1;
  bool operator==(const SynthConfig &) const = default;
};

/// Scalar latent t ~ U[l_min, l_max] embedded as sin(w_i * t' + phi_i) over
/// dim frequencies (t' = t rescaled to [0, 1]) plus Gaussian noise. The
/// frequencies and phases are drawn once from the seed.
Dataset gen_synthetic(const SynthConfig &config, const LabelSpace &space);

/// Reads the `f0,...,f{d-1},y[,sigma]` contract.
Dataset load_csv(const std::filesystem::path &path, const LabelSpace &space);
Dataset parse_csv(const std::string &text, const LabelSpace &space,
                  const std::string &provenance = "inline");
void save_csv(const std::filesystem::path &path, const Dataset &data);

struct PredictionRow {
  std::size_t index = 0;
  double y_true = 0.0;
  double y_pred = 0.0;
};

/// Writes `index,y_true,y_pred` with round-trip precision.
void save_predictions(const std::filesystem::path &path, std::span<const double> preds,
                      std::span<const double> truths);
std::vector<PredictionRow> load_predictions(const std::filesystem::path &path);

/// Seeded shuffle, then the first round(fraction * n) samples go to train.
std::pair<Dataset, Dataset> split(const Dataset &data, double train_fraction,
                                  std::uint64_t seed);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

} // namespace dldl
