// dldl: label-distribution learning with expectation regression.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure (including
// a failed gradient check).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dldl/commands.hpp"
#include "dldl/errors.hpp"

using namespace dldl;

namespace {

/// "l_min:step:l_max"
LabelSpace parse_grid(const std::string &text) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  double lo = 0, step = 0, hi = 0;
  char c1 = 0, c2 = 0;
  if (!(in >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' || !in.eof())
    throw InvalidArgument("grid must look like l_min:step:l_max, got '" + text + "'");
  return make_label_space(lo, hi, step);
}

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

void write_or_print(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InvalidArgument("cannot write " + path);
  out << text;
}

struct Overrides {
  std::string config_path;
  std::string head, grid, heads, seeds, out, data_csv, test_csv;
  std::optional<double> lambda, sigma, lr;
  std::optional<std::size_t> epochs, batch_size;
  bool serial = false;

  void attach(CLI::App *cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration");
    cmd->add_option("--head", head, "head kind");
    cmd->add_option("--lambda", lambda, "expectation loss weight");
    cmd->add_option("--sigma", sigma, "target distribution spread");
    cmd->add_option("--grid", grid, "label grid l_min:step:l_max");
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--batch-size", batch_size, "mini-batch size");
    cmd->add_option("--lr", lr, "base learning rate");
    cmd->add_option("--seeds", seeds, "comma-separated model seeds");
    cmd->add_option("--data", data_csv, "training CSV (f0..,y[,sigma])");
    cmd->add_option("--test-data", test_csv, "test CSV; otherwise the data is split");
    cmd->add_option("--out", out, "output directory");
    cmd->add_flag("--serial", serial, "use the serial reference kernels");
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (!head.empty())
      c.head = parse_head_kind(head);
    if (!heads.empty())
      c.heads = split_list(heads);
    if (lambda)
      c.lambda = *lambda;
    if (sigma)
      c.sigma = *sigma;
    if (!grid.empty()) {
      const LabelSpace s = parse_grid(grid);
      c.l_min = s.l_min;
      c.l_max = s.l_max;
      c.step = s.step;
    }
    if (epochs)
      c.epochs = *epochs;
    if (batch_size)
      c.batch_size = *batch_size;
    if (lr)
      c.base_lr = *lr;
    if (!seeds.empty()) {
      c.seeds.clear();
      for (const auto &s : split_list(seeds))
        c.seeds.push_back(std::stoull(s));
    }
    if (!data_csv.empty()) {
      c.data_source = "csv";
      c.csv_path = data_csv;
    }
    if (!test_csv.empty())
      c.test_csv_path = test_csv;
    if (!out.empty())
      c.output = out;
    if (serial)
      c.parallel = false;
    validate_config(c);
    return c;
  }
};

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Label-distribution learning with expectation regression"};
  app.require_subcommand(1);

  // encode
  auto *encode = app.add_subcommand("encode", "print the label encodings of one target");
  double enc_y = 0.0, enc_sigma = 2.0;
  std::string enc_grid = "0:1:100", enc_out;
  encode->add_option("--y", enc_y, "target value")->required();
  encode->add_option("--sigma", enc_sigma, "distribution spread");
  encode->add_option("--grid", enc_grid, "label grid l_min:step:l_max");
  encode->add_option("--out", enc_out, "CSV output path (default stdout)");

  // train
  auto *train_cmd = app.add_subcommand("train", "train one model");
  Overrides train_ov;
  train_ov.attach(train_cmd);

  // eval
  auto *eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_ckpt, eval_data, eval_config, eval_split = "test", eval_report;
  bool eval_skip_sigma = false;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint JSON")->required();
  eval_cmd->add_option("--data", eval_data, "CSV dataset");
  eval_cmd->add_option("--config", eval_config, "run config whose data split to evaluate");
  eval_cmd->add_option("--split", eval_split, "train | test | all (with --config)");
  eval_cmd->add_option("--report", eval_report, "JSON report path (default stdout)");
  eval_cmd->add_flag("--skip-bad-sigma", eval_skip_sigma,
                     "leave samples with sigma <= 0 out of the epsilon-error");

  // compare
  auto *compare = app.add_subcommand("compare", "ablation table across heads and seeds");
  Overrides cmp_ov;
  cmp_ov.attach(compare);
  compare->add_option("--heads", cmp_ov.heads, "comma-separated head variants");

  // gradcheck
  auto *gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  GradcheckOptions gc;
  std::string gc_heads;
  gradcheck->add_option("--configs", gc.configs, "random configurations per head");
  gradcheck->add_option("--tolerance", gc.tolerance, "max allowed relative error");
  gradcheck->add_option("--fd-step", gc.h, "finite-difference step");
  gradcheck->add_option("--seed", gc.seed, "random seed");
  gradcheck->add_option("--heads", gc_heads, "comma-separated head kinds");

  // interpret
  auto *interpret = app.add_subcommand("interpret", "score maps and occlusion sensitivity");
  std::string it_ckpt, it_mode, it_maps, it_data, it_fill, it_out;
  std::size_t it_h = 0, it_w = 0, it_mh = 0, it_mw = 0, it_stride = 0;
  interpret->add_option("--checkpoint", it_ckpt, "checkpoint JSON")->required();
  interpret->add_option("--mode", it_mode, "scoremap | occlusion")
      ->required()
      ->check(CLI::IsMember({"scoremap", "occlusion"}));
  interpret->add_option("--maps", it_maps, "feature-map JSON (scoremap)");
  interpret->add_option("--data", it_data, "grid CSV (occlusion)");
  interpret->add_option("--height", it_h, "grid height");
  interpret->add_option("--width", it_w, "grid width");
  interpret->add_option("--mask-height", it_mh, "occluder height");
  interpret->add_option("--mask-width", it_mw, "occluder width (default: mask height)");
  interpret->add_option("--stride", it_stride, "occluder stride (default: mask height)");
  interpret->add_option("--fill-data", it_fill, "CSV whose per-cell mean fills the mask");
  interpret->add_option("--out", it_out, "CSV matrix output (default stdout)");

  // synth
  auto *synth = app.add_subcommand("synth", "write the synthetic benchmark as CSV");
  Overrides synth_ov;
  synth->add_option("--config", synth_ov.config_path, "JSON run configuration");
  std::string synth_out;
  synth->add_option("--out", synth_out, "CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*encode) {
      const cli::EncodeTable t = cli::cmd_encode(enc_y, enc_sigma, parse_grid(enc_grid));
      write_or_print(enc_out, cli::encode_table_csv(t));
      std::fprintf(stderr, "max |ranking - (1 - cumulative)| = %.3e\n", t.max_ranking_gap);
    } else if (*train_cmd) {
      const RunConfig c = train_ov.resolve();
      const cli::TrainOutput out = cli::cmd_train(c, c.output);
      const auto &last = out.history.empty() ? EpochLog{} : out.history.back();
      std::printf("trained %s for %zu epochs: loss %.6g, test MAE %.6g -> %s\n",
                  std::string(to_string(c.head)).c_str(), out.history.size(), last.loss,
                  out.test_report.mae, c.output.c_str());
    } else if (*eval_cmd) {
      const Checkpoint ckpt = load_checkpoint(eval_ckpt);
      Dataset data;
      if (!eval_data.empty()) {
        data = load_csv(eval_data, ckpt.model.space());
      } else if (!eval_config.empty()) {
        const RunConfig c = load_config(eval_config);
        auto [tr, te] = load_data(c, ckpt.model.space());
        if (eval_split == "train") {
          data = std::move(tr);
        } else if (eval_split == "test") {
          data = std::move(te);
        } else if (eval_split == "all") {
          data = std::move(tr);
          data.samples.insert(data.samples.end(), te.samples.begin(), te.samples.end());
        } else {
          throw InvalidArgument("--split must be train, test or all");
        }
      } else {
        throw InvalidArgument("eval needs --data or --config");
      }
      const std::string text = cli::cmd_eval(ckpt, data, std::nullopt, eval_skip_sigma);
      write_or_print(eval_report, text);
    } else if (*compare) {
      const RunConfig c = cmp_ov.resolve();
      const auto rows = cli::cmd_compare(c, std::filesystem::path(c.output));
      std::cout << cli::compare_csv(rows);
    } else if (*gradcheck) {
      if (!gc_heads.empty()) {
        gc.heads.clear();
        for (const auto &h : split_list(gc_heads))
          gc.heads.push_back(parse_head_kind(h));
      }
      const auto reports = run_gradcheck(gc);
      std::cout << cli::gradcheck_text(reports, gc.tolerance);
      for (const auto &r : reports)
        if (!r.passed)
          return cli::kNumericalFailure;
    } else if (*interpret) {
      const Checkpoint ckpt = load_checkpoint(it_ckpt);
      if (it_mode == "scoremap") {
        if (it_maps.empty())
          throw InvalidArgument("scoremap needs --maps");
        const ScoreMap s = cli::cmd_scoremap(ckpt, cli::load_feature_map(it_maps));
        write_or_print(it_out, matrix_to_csv(s.values));
      } else {
        if (it_data.empty() || it_h == 0 || it_w == 0 || it_mh == 0)
          throw InvalidArgument("occlusion needs --data, --height, --width and --mask-height");
        const GridInputs grids =
            cli::grids_from_dataset(load_csv(it_data, ckpt.model.space()), it_h, it_w);
        const Vector fill = it_fill.empty()
                                ? cell_means(grids)
                                : cell_means(cli::grids_from_dataset(
                                      load_csv(it_fill, ckpt.model.space()), it_h, it_w));
        const OcclusionGrid g = cli::cmd_occlusion(ckpt, grids, it_mh, it_mw ? it_mw : it_mh,
                                                   it_stride ? it_stride : it_mh, fill);
        write_or_print(it_out, matrix_to_csv(g.relative_loss));
      }
    } else if (*synth) {
      const RunConfig c = synth_ov.resolve();
      save_csv(synth_out, gen_synthetic(c.synthetic, label_space_of(c)));
    }
  } catch (const std::domain_error &e) {
    std::fprintf(stderr, "dldl: numerical failure: %s\n", e.what());
    return cli::kNumericalFailure;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "dldl: %s\n", e.what());
    return cli::kValidationError;
  }
  return cli::kOk;
}
