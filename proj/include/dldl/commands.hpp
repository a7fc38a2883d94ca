#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dldl/checkpoint.hpp"
#include "dldl/gradcheck.hpp"
#include "dldl/interpret.hpp"
#include "dldl/metrics.hpp"
#include "dldl/run_config.hpp"
#include "dldl/trainer.hpp"

namespace dldl::cli {

enum ExitCode : int { kOk = 0, kValidationError = 1, kNumericalFailure = 2 };

// encode ----------------------------------------------------------------------

struct EncodeTable {
  LabelSpace space;
  Vector distribution;   // renormalized Gaussian
  Vector cdf;            // closed-form normal c.d.f.
  Vector cumulative;     // prefix sum of distribution
  Vector ranking;        // exact threshold encoding, K-1 entries
  Vector approx_ranking; // 1 - cumulative, K-1 entries
  /// max |ranking - approx_ranking|
  double max_ranking_gap = 0.0;
};

EncodeTable cmd_encode(double y, double sigma, const LabelSpace &space);

/// index,label,distribution,cdf,cumulative,ranking,approx_ranking; the last
/// row leaves the two ranking columns empty.
std::string encode_table_csv(const EncodeTable &table);

// train / eval ----------------------------------------------------------------

struct TrainOutput {
  Checkpoint checkpoint;
  std::vector<EpochLog> history;
  EvalReport train_report;
  EvalReport test_report;
};

/// Writes checkpoint.json, train_log.csv, report.json and predictions.csv
/// (test split) into out_dir.
TrainOutput cmd_train(const RunConfig &config, const std::filesystem::path &out_dir);

std::string history_csv(const std::vector<EpochLog> &history);

EvalReport evaluate_model(const Model &model, const Dataset &data, bool skip_bad_sigma = false,
                          bool parallel = true);

std::string report_json(const EvalReport &report);

/// Evaluates a checkpoint and returns the JSON report text (metrics plus a
/// checkpoint echo); also writes it to report_path when given.
std::string cmd_eval(const Checkpoint &checkpoint, const Dataset &data,
                     const std::optional<std::filesystem::path> &report_path,
                     bool skip_bad_sigma = false);

// compare ---------------------------------------------------------------------

struct CompareRow {
  std::string variant;
  std::vector<EvalReport> runs; // one per seed, in seed order
  double mae_median = 0.0, mae_spread = 0.0;
  double rmse_median = 0.0, rmse_spread = 0.0;
  std::optional<double> pc_median, pc_spread;
  std::optional<double> eps_median, eps_spread;
};

/// Median and spread (max - min) across seeds per head variant, test split.
/// Writes compare.csv and compare.json when out_dir is given.
std::vector<CompareRow> cmd_compare(const RunConfig &config,
                                    const std::optional<std::filesystem::path> &out_dir);

std::string compare_csv(const std::vector<CompareRow> &rows);

double median(std::vector<double> values);

// gradcheck -------------------------------------------------------------------

std::string gradcheck_text(const std::vector<GradcheckReport> &reports, double tolerance);

// interpret -------------------------------------------------------------------

/// Feature-map JSON: {"channels": C, "height": H, "width": W, "values": [...]}
/// with values channel-major.
FeatureMap load_feature_map(const std::filesystem::path &path);
std::string feature_map_json(const FeatureMap &map);

/// Score map of externally supplied maps against a softmax head; the class
/// probabilities come from the head applied to the GAP of the maps.
ScoreMap cmd_scoremap(const Checkpoint &checkpoint, const FeatureMap &maps);

/// Grid rows of a dataset, each sample's features read as a row-major
/// height x width grid.
GridInputs grids_from_dataset(const Dataset &data, std::size_t height, std::size_t width);

OcclusionGrid cmd_occlusion(const Checkpoint &checkpoint, const GridInputs &grids,
                            std::size_t mask_height, std::size_t mask_width, std::size_t stride,
                            const Vector &fill);

} // namespace dldl::cli
