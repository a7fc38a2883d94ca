#include "dldl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dldl/errors.hpp"

namespace dldl::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InvalidArgument("cannot write " + path.string());
  out << text;
}

std::string csv_number(double v) { return std::isnan(v) ? std::string() : format_double(v); }

ordered_json report_object(const EvalReport &r) {
  ordered_json j;
  j["n"] = r.n;
  j["mae"] = r.mae;
  j["rmse"] = r.rmse;
  j["pearson"] = r.pearson ? ordered_json(*r.pearson) : ordered_json(nullptr);
  if (r.epsilon_error)
    j["epsilon_error"] = *r.epsilon_error;
  if (r.skipped_sigma)
    j["skipped_sigma"] = r.skipped_sigma;
  return j;
}

ordered_json model_echo(const Checkpoint &ckpt) {
  const Model &m = ckpt.model;
  ordered_json j;
  j["head"] = std::string(to_string(m.kind));
  j["lambda"] = m.loss.lambda;
  j["sigma"] = m.loss.sigma;
  j["distribution_term"] = m.loss.distribution_term;
  j["label_space"] = {{"l_min", m.space().l_min}, {"l_max", m.space().l_max},
                      {"step", m.space().step}};
  j["dims"] = m.backbone.dims();
  j["seed"] = ckpt.seed;
  return j;
}

std::pair<double, double> median_spread(const std::vector<double> &v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {median(v), *hi - *lo};
}

} // namespace

// encode ----------------------------------------------------------------------

EncodeTable cmd_encode(double y, double sigma, const LabelSpace &space) {
  EncodeTable t;
  t.space = space;
  const Distribution dist = encode_distribution(y, sigma, space);
  t.distribution = dist.probs;
  t.cdf = encode_cdf(y, sigma, space).values;
  t.cumulative = cumulate(dist).values;
  t.ranking = encode_ranking(y, space).values;
  t.approx_ranking = ranking_from_distribution(dist).values;
  for (std::size_t j = 0; j < t.ranking.size(); ++j)
    t.max_ranking_gap = std::max(t.max_ranking_gap, std::abs(t.ranking[j] - t.approx_ranking[j]));
  return t;
}

std::string encode_table_csv(const EncodeTable &t) {
  std::ostringstream out;
  out << "index,label,distribution,cdf,cumulative,ranking,approx_ranking\n";
  for (std::size_t k = 0; k < t.distribution.size(); ++k) {
    out << k << ',' << format_double(t.space.label(k)) << ',' << format_double(t.distribution[k])
        << ',' << format_double(t.cdf[k]) << ',' << format_double(t.cumulative[k]) << ',';
    if (k < t.ranking.size())
      out << format_double(t.ranking[k]) << ',' << format_double(t.approx_ranking[k]);
    else
      out << ',';
    out << '\n';
  }
  return out.str();
}

// train / eval ----------------------------------------------------------------

EvalReport evaluate_model(const Model &model, const Dataset &data, bool skip_bad_sigma,
                          bool parallel) {
  validate_dataset(data);
  const Vector preds = predict_all(model, data, parallel);
  const Vector truths = data.targets();
  const Vector sigmas = data.sigmas();
  return evaluate(preds, truths, sigmas, skip_bad_sigma);
}

std::string report_json(const EvalReport &report) { return report_object(report).dump(2) + "\n"; }

std::string history_csv(const std::vector<EpochLog> &history) {
  std::ostringstream out;
  out << "epoch,lr,loss,ld,er,train_mae,test_mae\n";
  for (const auto &e : history)
    out << e.epoch << ',' << csv_number(e.lr) << ',' << csv_number(e.loss) << ','
        << csv_number(e.ld) << ',' << csv_number(e.er) << ',' << csv_number(e.train_mae) << ','
        << csv_number(e.test_mae) << '\n';
  return out.str();
}

TrainOutput cmd_train(const RunConfig &config, const std::filesystem::path &out_dir) {
  validate_config(config);
  const LabelSpace space = label_space_of(config);
  auto [train_set, test_set] = load_data(config, space);
  if (train_set.dim() != config.backbone_dims.front())
    throw InvalidArgument("backbone input width " + std::to_string(config.backbone_dims.front()) +
                          " does not match the data dimension " +
                          std::to_string(train_set.dim()));
  const std::uint64_t seed = config.seeds.front();
  Model model = make_model(config.head, space, config.backbone_dims, config.lambda, config.sigma, seed);
  TrainResult result = train(std::move(model), train_set, &test_set, train_options_of(config, seed));

  TrainOutput out;
  out.checkpoint = {std::move(result.model), seed};
  out.history = std::move(result.history);
  out.train_report = evaluate_model(out.checkpoint.model, train_set, true, config.parallel);
  out.test_report = evaluate_model(out.checkpoint.model, test_set, true, config.parallel);

  std::filesystem::create_directories(out_dir);
  save_checkpoint(out_dir / "checkpoint.json", out.checkpoint);
  write_text(out_dir / "train_log.csv", history_csv(out.history));
  ordered_json report;
  report["config"] = ordered_json::parse(config_to_json(config));
  report["model"] = model_echo(out.checkpoint);
  report["train"] = report_object(out.train_report);
  report["test"] = report_object(out.test_report);
  write_text(out_dir / "report.json", report.dump(2) + "\n");
  save_predictions(out_dir / "predictions.csv",
                   predict_all(out.checkpoint.model, test_set, config.parallel), test_set.targets());
  return out;
}

std::string cmd_eval(const Checkpoint &checkpoint, const Dataset &data,
                     const std::optional<std::filesystem::path> &report_path,
                     bool skip_bad_sigma) {
  if (data.empty())
    throw InvalidArgument("evaluation dataset is empty");
  if (data.dim() != checkpoint.model.input_dim())
    throw InvalidArgument("dataset has " + std::to_string(data.dim()) +
                          " features but the checkpoint expects " +
                          std::to_string(checkpoint.model.input_dim()));
  const EvalReport r = evaluate_model(checkpoint.model, data, skip_bad_sigma);
  ordered_json j = report_object(r);
  j["config"] = model_echo(checkpoint);
  j["dataset"] = data.provenance;
  const std::string text = j.dump(2) + "\n";
  if (report_path)
    write_text(*report_path, text);
  return text;
}

// compare ---------------------------------------------------------------------

double median(std::vector<double> values) {
  if (values.empty())
    throw InvalidArgument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<CompareRow> cmd_compare(const RunConfig &config,
                                    const std::optional<std::filesystem::path> &out_dir) {
  validate_config(config);
  if (config.heads.size() < 2)
    throw InvalidArgument("compare needs at least two head variants");
  std::vector<CompareRow> rows;
  for (const std::string &text : config.heads) {
    const HeadVariant v = parse_head_variant(text);
    RunConfig rc = config;
    rc.head = v.head;
    if (v.lambda)
      rc.lambda = *v.lambda;
    if (v.sigma)
      rc.sigma = *v.sigma;
    if (v.step)
      rc.step = *v.step;
    const LabelSpace space = label_space_of(rc);
    auto [train_set, test_set] = load_data(rc, space);
    if (train_set.dim() != rc.backbone_dims.front())
      throw InvalidArgument("backbone input width does not match the data dimension");

    CompareRow row;
    row.variant = text;
    for (std::uint64_t seed : rc.seeds) {
      Model model = make_model(rc.head, space, rc.backbone_dims, rc.lambda, rc.sigma, seed);
      TrainResult result = train(std::move(model), train_set, nullptr, train_options_of(rc, seed));
      row.runs.push_back(evaluate_model(result.model, test_set, true, rc.parallel));
    }
    std::vector<double> maes, rmses, pcs, eps;
    for (const auto &r : row.runs) {
      maes.push_back(r.mae);
      rmses.push_back(r.rmse);
      if (r.pearson)
        pcs.push_back(*r.pearson);
      if (r.epsilon_error)
        eps.push_back(*r.epsilon_error);
    }
    std::tie(row.mae_median, row.mae_spread) = median_spread(maes);
    std::tie(row.rmse_median, row.rmse_spread) = median_spread(rmses);
    if (pcs.size() == row.runs.size()) {
      auto [m, s] = median_spread(pcs);
      row.pc_median = m;
      row.pc_spread = s;
    }
    if (eps.size() == row.runs.size()) {
      auto [m, s] = median_spread(eps);
      row.eps_median = m;
      row.eps_spread = s;
    }
    rows.push_back(std::move(row));
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_text(*out_dir / "compare.csv", compare_csv(rows));
    ordered_json j;
    j["config"] = ordered_json::parse(config_to_json(config));
    ordered_json table = ordered_json::array();
    for (const auto &row : rows) {
      ordered_json r;
      r["variant"] = row.variant;
      r["mae_median"] = row.mae_median;
      r["mae_spread"] = row.mae_spread;
      r["rmse_median"] = row.rmse_median;
      r["rmse_spread"] = row.rmse_spread;
      r["pc_median"] = row.pc_median ? ordered_json(*row.pc_median) : ordered_json(nullptr);
      r["pc_spread"] = row.pc_spread ? ordered_json(*row.pc_spread) : ordered_json(nullptr);
      r["eps_median"] = row.eps_median ? ordered_json(*row.eps_median) : ordered_json(nullptr);
      r["eps_spread"] = row.eps_spread ? ordered_json(*row.eps_spread) : ordered_json(nullptr);
      ordered_json runs = ordered_json::array();
      for (std::size_t i = 0; i < row.runs.size(); ++i) {
        ordered_json run = report_object(row.runs[i]);
        run["seed"] = config.seeds[i];
        runs.push_back(std::move(run));
      }
      r["runs"] = std::move(runs);
      table.push_back(std::move(r));
    }
    j["rows"] = std::move(table);
    write_text(*out_dir / "compare.json", j.dump(2) + "\n");
  }
  return rows;
}

std::string compare_csv(const std::vector<CompareRow> &rows) {
  auto opt = [](const std::optional<double> &v) { return v ? format_double(*v) : std::string(); };
  std::ostringstream out;
  out << "variant,seeds,mae_median,mae_spread,rmse_median,rmse_spread,pc_median,pc_spread,"
         "eps_median,eps_spread\n";
  for (const auto &r : rows)
    out << r.variant << ',' << r.runs.size() << ',' << format_double(r.mae_median) << ','
        << format_double(r.mae_spread) << ',' << format_double(r.rmse_median) << ','
        << format_double(r.rmse_spread) << ',' << opt(r.pc_median) << ',' << opt(r.pc_spread)
        << ',' << opt(r.eps_median) << ',' << opt(r.eps_spread) << '\n';
  return out.str();
}

// gradcheck -------------------------------------------------------------------

std::string gradcheck_text(const std::vector<GradcheckReport> &reports, double tolerance) {
  std::ostringstream out;
  out << "head,configs,max_error,tolerance,status\n";
  for (const auto &r : reports)
    out << to_string(r.head) << ',' << r.configs << ',' << format_double(r.max_error) << ','
        << format_double(tolerance) << ',' << (r.passed ? "PASS" : "FAIL") << '\n';
  return out.str();
}

// interpret -------------------------------------------------------------------

FeatureMap load_feature_map(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidArgument("cannot open feature map " + path.string());
  try {
    const json j = json::parse(in);
    FeatureMap map(j.at("channels").get<std::size_t>(), j.at("height").get<std::size_t>(),
                   j.at("width").get<std::size_t>());
    map.values = j.at("values").get<std::vector<double>>();
    validate_feature_map(map);
    return map;
  } catch (const json::exception &e) {
    throw InvalidArgument(std::string("malformed feature map: ") + e.what());
  }
}

std::string feature_map_json(const FeatureMap &map) {
  ordered_json j;
  j["channels"] = map.channels;
  j["height"] = map.height;
  j["width"] = map.width;
  j["values"] = map.values;
  return j.dump() + "\n";
}

ScoreMap cmd_scoremap(const Checkpoint &checkpoint, const FeatureMap &maps) {
  const Model &m = checkpoint.model;
  if (m.kind == HeadKind::mr_l1 || m.kind == HeadKind::mr_l2 || m.kind == HeadKind::ranking)
    throw InvalidArgument("score maps need a softmax head");
  const FeatureMap cams = class_activation_maps(maps, m.head);
  const Vector logits = head_forward(global_avg_pool(maps), m.head);
  return score_map(cams, softmax(logits, m.space()));
}

GridInputs grids_from_dataset(const Dataset &data, std::size_t height, std::size_t width) {
  if (data.dim() != height * width)
    throw InvalidArgument("dataset rows have " + std::to_string(data.dim()) +
                          " features, not a " + std::to_string(height) + "x" +
                          std::to_string(width) + " grid");
  GridInputs g;
  g.height = height;
  g.width = width;
  for (const auto &s : data.samples) {
    g.inputs.push_back(s.features);
    g.truths.push_back(s.target);
  }
  return g;
}

OcclusionGrid cmd_occlusion(const Checkpoint &checkpoint, const GridInputs &grids,
                            std::size_t mask_height, std::size_t mask_width, std::size_t stride,
                            const Vector &fill) {
  const Model &model = checkpoint.model;
  if (grids.height * grids.width != model.input_dim())
    throw InvalidArgument("grid size does not match the checkpoint input");
  const GridPredictor predictor = [&model](std::span<const double> x) { return predict(model, x); };
  return occlusion_sensitivity(predictor, grids, mask_height, mask_width, stride, fill);
}

} // namespace dldl::cli
