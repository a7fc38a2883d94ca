#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dldl/commands.hpp"
#include "dldl/errors.hpp"
#include <json.hpp>

using namespace dldl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / "dldl_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(DLDL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig tiny_config() {
  RunConfig c;
  c.synthetic.n = 120;
  c.synthetic.dim = 4;
  c.backbone_dims = {4, 8, 6};
  c.l_max = 20;
  c.epochs = 3;
  c.batch_size = 16;
  c.seeds = {3, 4};
  return c;
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("config round trip") {
  RunConfig c = tiny_config();
  c.head = HeadKind::ranking;
  c.heads = {"joint:lambda=0.1", "dex"};
  c.lambda = 0.25;
  c.step = 0.5;
  c.synthetic.label_sigma.reset();
  c.data_source = "csv";
  c.csv_path = "a.csv";
  c.parallel = false;
  const RunConfig back = config_from_json(config_to_json(c));
  CHECK(back == c);
  CHECK(config_from_json(config_to_json(RunConfig{})) == RunConfig{});
  CHECK(config_from_json("{}") == RunConfig{});
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(config_from_json("{not json"), ParseError);
  CHECK_THROWS_AS(config_from_json(R"({"head": "svm"})"), InvalidArgument);
  CHECK_THROWS_AS(config_from_json(R"({"lambda": "big"})"), InvalidArgument);
  RunConfig c;
  c.backbone_dims = {16};
  CHECK_THROWS_AS(validate_config(c), InvalidArgument);
  c = {};
  c.lambda = -1;
  CHECK_THROWS_AS(validate_config(c), InvalidArgument);
  c = {};
  c.data_source = "csv";
  CHECK_THROWS_AS(validate_config(c), InvalidArgument);
  c = {};
  c.seeds.clear();
  CHECK_THROWS_AS(validate_config(c), InvalidArgument);
  c = {};
  c.step = 0.3;
  c.l_max = 1;
  CHECK_THROWS_AS(label_space_of(c), DegenerateGrid);
}

TEST_CASE("head variants") {
  const HeadVariant v = parse_head_variant("joint:lambda=0.1:step=0.5");
  CHECK(v.head == HeadKind::joint);
  CHECK(v.lambda == 0.1);
  CHECK(v.step == 0.5);
  CHECK_FALSE(v.sigma);
  CHECK(parse_head_variant("dex").head == HeadKind::dex);
  CHECK_THROWS_AS(parse_head_variant("joint:lambda"), InvalidArgument);
  CHECK_THROWS_AS(parse_head_variant("joint:gamma=1"), InvalidArgument);
  CHECK_THROWS_AS(parse_head_variant("joint:lambda=x"), InvalidArgument);
}

TEST_CASE("checkpoint round trip is lossless") {
  const LabelSpace s = make_label_space(0, 10, 0.5);
  for (HeadKind k : {HeadKind::joint, HeadKind::ranking, HeadKind::mr_l1}) {
    const Checkpoint c{make_model(k, s, std::vector<std::size_t>{5, 7, 3}, 0.3, 1.5, 9), 9};
    const std::string text = checkpoint_to_string(c);
    const Checkpoint back = checkpoint_from_string(text);
    CHECK(back.model == c.model);
    CHECK(back.seed == 9);
    CHECK(checkpoint_to_string(back) == text);
  }
  CHECK_THROWS_AS(checkpoint_from_string("[]"), InvalidArgument);
  CHECK_THROWS_AS(checkpoint_from_string("{"), ParseError);
  auto j = nlohmann::json::parse(checkpoint_to_string(
      {make_model(HeadKind::joint, s, std::vector<std::size_t>{5, 3}, 1, 2, 1), 1}));
  j["version"] = 99;
  CHECK_THROWS_AS(checkpoint_from_string(j.dump()), InvalidArgument);
  j["version"] = 1;
  j["head_params"]["bias"].erase(0);
  CHECK_THROWS_AS(checkpoint_from_string(j.dump()), InvalidArgument);
}

}

TEST_SUITE("commands") {

TEST_CASE("encode table") {
  const LabelSpace s = make_label_space(0, 100, 1);
  const auto t = cli::cmd_encode(50, 2, s);
  CHECK(t.distribution.size() == 101);
  CHECK(t.ranking.size() == 100);
  CHECK(t.approx_ranking.size() == 100);
  const std::string csv = cli::encode_table_csv(t);
  std::istringstream in(csv);
  std::string line, last;
  std::getline(in, line);
  CHECK(line == "index,label,distribution,cdf,cumulative,ranking,approx_ranking");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    last = line;
    ++rows;
  }
  CHECK(rows == 101);
  CHECK(last.substr(last.size() - 2) == ",,");
}

TEST_CASE("train writes every artifact and is byte-deterministic") {
  const RunConfig c = tiny_config();
  const auto a = scratch("train_a"), b = scratch("train_b");
  const auto out = cli::cmd_train(c, a);
  cli::cmd_train(c, b);
  for (const char *f : {"checkpoint.json", "train_log.csv", "report.json", "predictions.csv"}) {
    INFO(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(out.history.size() == 3);
  const auto report = nlohmann::json::parse(slurp(a / "report.json"));
  CHECK(report.contains("config"));
  CHECK(report["config"]["lambda"] == 1.0);
  CHECK(report["test"]["mae"].get<double>() == out.test_report.mae);

  // zero epochs leaves the initialization untouched
  RunConfig none = c;
  none.epochs = 0;
  const auto z = cli::cmd_train(none, scratch("train_zero"));
  CHECK(z.checkpoint.model ==
        make_model(c.head, label_space_of(c), c.backbone_dims, c.lambda, c.sigma, c.seeds[0]));
}

TEST_CASE("eval") {
  const RunConfig c = tiny_config();
  const auto dir = scratch("eval");
  const auto out = cli::cmd_train(c, dir);
  const auto [train, test] = load_data(c, label_space_of(c));
  const std::string text = cli::cmd_eval(out.checkpoint, test, dir / "eval.json");
  const auto j = nlohmann::json::parse(text);
  CHECK(j["mae"].get<double>() == doctest::Approx(out.test_report.mae).epsilon(1e-15));
  CHECK(slurp(dir / "eval.json").size() > 0);

  Dataset wrong = test;
  for (auto &s : wrong.samples)
    s.features.push_back(0.0);
  CHECK_THROWS_AS(cli::cmd_eval(out.checkpoint, wrong, std::nullopt), InvalidArgument);
  CHECK_THROWS_AS(cli::cmd_eval(out.checkpoint, Dataset{}, std::nullopt), InvalidArgument);
}

TEST_CASE("compare aggregates over seeds") {
  RunConfig c = tiny_config();
  c.heads = {"joint", "joint:lambda=0", "mr_l2"};
  const auto dir = scratch("compare");
  const auto rows = cli::cmd_compare(c, dir);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].runs.size() == 2);
  CHECK(rows[1].variant == "joint:lambda=0");
  const double lo = std::min(rows[0].runs[0].mae, rows[0].runs[1].mae);
  const double hi = std::max(rows[0].runs[0].mae, rows[0].runs[1].mae);
  CHECK(rows[0].mae_median == doctest::Approx((lo + hi) / 2));
  CHECK(rows[0].mae_spread == doctest::Approx(hi - lo));
  CHECK(fs::exists(dir / "compare.csv"));
  CHECK(fs::exists(dir / "compare.json"));
  CHECK(cli::median({3, 1, 2}) == 2);
  CHECK(cli::median({4, 1, 2, 3}) == 2.5);
}

TEST_CASE("interpret commands") {
  const LabelSpace s = make_label_space(0, 4, 1);
  Model m = make_model(HeadKind::joint, s, std::vector<std::size_t>{4, 3}, 1, 2, 1);
  // a head dominated by one class puts all score-map weight on its map
  std::fill(m.head.weight.data.begin(), m.head.weight.data.end(), 0.0);
  std::fill(m.head.bias.begin(), m.head.bias.end(), -50.0);
  m.head.bias[2] = 50.0;
  FeatureMap maps(3, 2, 2);
  for (std::size_t i = 0; i < maps.values.size(); ++i)
    maps.values[i] = static_cast<double>(i);
  const ScoreMap sm = cli::cmd_scoremap({m, 1}, maps);
  const FeatureMap cams = class_activation_maps(maps, m.head);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(sm.values.data[i] == doctest::Approx(cams.channel(2)[i]).epsilon(1e-12));

  const auto dir = scratch("interpret");
  std::ofstream(dir / "maps.json") << cli::feature_map_json(maps);
  const FeatureMap back = cli::load_feature_map(dir / "maps.json");
  CHECK(back.values == maps.values);
  CHECK(back.channels == 3);
  std::ofstream(dir / "bad.json") << R"({"channels":2,"height":2,"width":2,"values":[1,2]})";
  CHECK_THROWS_AS(cli::load_feature_map(dir / "bad.json"), InvalidArgument);

  const Dataset d = parse_csv("f0,f1,f2,f3,y\n1,2,3,4,1\n0,1,0,1,3\n", s);
  const GridInputs g = cli::grids_from_dataset(d, 2, 2);
  CHECK(g.inputs.size() == 2);
  CHECK_THROWS_AS(cli::grids_from_dataset(d, 3, 2), InvalidArgument);
  const OcclusionGrid o = cli::cmd_occlusion({m, 1}, g, 1, 1, 1, cell_means(g));
  CHECK(o.relative_loss.rows == 2);
  CHECK(o.relative_loss.cols == 2);
}

}

TEST_SUITE("cli binary") {

TEST_CASE("exit codes") {
  const auto dir = scratch("binary");
  CHECK(run_cli("encode --y 50 --sigma 2 --grid 0:1:100") == 0);
  CHECK(run_cli("encode --y 50 --sigma 0") == 1);
  CHECK(run_cli("encode --y 50 --grid 0:0.3:1") == 1);
  CHECK(run_cli("train --config " + (dir / "missing.json").string()) == 1);
  CHECK(run_cli("eval --checkpoint " + (dir / "missing.json").string()) == 1);
  CHECK(run_cli("frobnicate") != 0);
  CHECK(run_cli("gradcheck --configs 4 --heads joint,mr_l1") == 0);
  // an unreachable tolerance is a numerical failure, not a usage error
  CHECK(run_cli("gradcheck --configs 2 --heads joint --tolerance 1e-15") == 2);

  std::ofstream(dir / "bad.csv") << "f0,f1,y\n1,2\n";
  CHECK(run_cli("train --data " + (dir / "bad.csv").string() + " --epochs 1") == 1);
}

TEST_CASE("train, eval and interpret end to end") {
  const auto dir = scratch("e2e");
  const RunConfig c = tiny_config();
  std::ofstream(dir / "cfg.json") << config_to_json(c);
  const std::string cfg = (dir / "cfg.json").string();
  REQUIRE(run_cli("train --config " + cfg + " --out " + (dir / "run").string()) == 0);
  const std::string ckpt = (dir / "run" / "checkpoint.json").string();
  CHECK(run_cli("eval --checkpoint " + ckpt + " --config " + cfg + " --split test --report " +
                (dir / "eval.json").string()) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "eval.json"));
  const auto r = nlohmann::json::parse(slurp(dir / "run" / "report.json"));
  CHECK(j["mae"] == r["test"]["mae"]);

  std::ofstream(dir / "grid.csv") << "f0,f1,f2,f3,y\n1,2,3,4,1\n0,1,0,1,3\n";
  // the checkpoint expects 4 inputs, a 2x2 grid matches
  CHECK(run_cli("interpret --checkpoint " + ckpt + " --mode occlusion --data " +
                (dir / "grid.csv").string() + " --height 2 --width 2 --mask-height 1 --out " +
                (dir / "occ.csv").string()) == 0);
  CHECK(slurp(dir / "occ.csv").size() > 0);
  CHECK(run_cli("interpret --checkpoint " + ckpt + " --mode occlusion --data " +
                (dir / "grid.csv").string() + " --height 3 --width 2 --mask-height 1") == 1);
}

}
