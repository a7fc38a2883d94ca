#include <doctest.h>

#include <numeric>
#include <random>

#include "dldl/backbone.hpp"
#include "dldl/errors.hpp"
#include "dldl/gradcheck.hpp"
#include "dldl/model.hpp"
#include "oracles.hpp"

using namespace dldl;

namespace {

FeatureMap random_map(std::mt19937_64 &rng, std::size_t c, std::size_t h, std::size_t w) {
  FeatureMap m(c, h, w);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double &v : m.values)
    v = n(rng);
  return m;
}

} // namespace

TEST_SUITE("backbone") {

TEST_CASE("init is seeded He normal with zero biases") {
  const std::vector<std::size_t> dims{16, 64, 64};
  const MlpParams a = init_params(dims, 3);
  const MlpParams b = init_params(dims, 3);
  const MlpParams c = init_params(dims, 4);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.dims() == dims);
  for (const auto &layer : a.layers)
    for (double v : layer.bias)
      CHECK(v == 0.0);

  const MlpParams wide = init_params(std::vector<std::size_t>{200, 400}, 9);
  const auto &w = wide.layers[0].weight.data;
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / w.size();
  double var = 0.0;
  for (double v : w)
    var += (v - mean) * (v - mean);
  var /= w.size();
  CHECK(std::abs(mean) < 0.005);
  CHECK(var == doctest::Approx(2.0 / 200).epsilon(0.03));

  CHECK_THROWS_AS(init_params(std::vector<std::size_t>{16}, 1), InvalidArgument);
  CHECK_THROWS_AS(init_params(std::vector<std::size_t>{16, 0}, 1), InvalidArgument);
}

TEST_CASE("forward matches a naive two-layer evaluation") {
  std::mt19937_64 rng(2);
  MlpParams p = init_params(std::vector<std::size_t>{5, 7, 3}, 11);
  for (auto &l : p.layers)
    for (double &b : l.bias)
      b = 0.1 * std::normal_distribution<double>()(rng);
  const auto x = oracle::random_vector(rng, 5);
  auto rows = [](const Matrix &m) {
    std::vector<oracle::Vec> out;
    for (std::size_t r = 0; r < m.rows; ++r)
      out.emplace_back(m.row(r).begin(), m.row(r).end());
    return out;
  };
  auto h = oracle::matvec(rows(p.layers[0].weight), p.layers[0].bias, x);
  for (double &v : h)
    v = std::max(0.0, v);
  const auto ref = oracle::matvec(rows(p.layers[1].weight), p.layers[1].bias, h);
  const auto got = mlp_forward(x, p);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::abs(got[i] - ref[i]) < 1e-13);

  // bitwise deterministic
  CHECK(mlp_forward(x, p) == got);
  MlpCache cache;
  CHECK(mlp_forward(x, p, cache) == got);

  CHECK_THROWS_AS(mlp_forward(Vector(4, 0.0), p), InvalidArgument);
  MlpParams broken = p;
  broken.layers[1].weight = Matrix(3, 6);
  CHECK_THROWS_AS(validate_mlp(broken), InvalidArgument);
}

TEST_CASE("end-to-end gradient check over 20 seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    GradcheckCase c = random_gradcheck_case(HeadKind::joint, seed, rng);
    Workspace ws;
    Vector grad(c.model.parameter_count());
    sample_gradient(c.model, c.input, c.y, grad, ws);
    const double err = max_gradient_error(c.model, c.input, c.y, grad, 1e-6);
    INFO("seed " << seed);
    CHECK(err < 1e-5);
  }
}

TEST_CASE("pooling") {
  FeatureMap m(1, 4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      m.at(0, r, c) = static_cast<double>(r * 4 + c);
  CHECK(global_avg_pool(m)[0] == 7.5);
  const FeatureMap mp = max_pool_2x2(m);
  CHECK(mp.height == 2);
  CHECK(mp.width == 2);
  CHECK(mp.values == Vector{5, 7, 13, 15});
  CHECK(hybrid_pool(m)[0] == 10.0);

  // odd sizes drop the trailing row and column
  FeatureMap odd(1, 3, 5, 1.0);
  odd.at(0, 2, 4) = 100.0;
  const FeatureMap op = max_pool_2x2(odd);
  CHECK(op.height == 1);
  CHECK(op.width == 2);
  CHECK(op.values == Vector{1.0, 1.0});
  CHECK_THROWS_AS(max_pool_2x2(FeatureMap(1, 1, 4)), InvalidArgument);

  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const FeatureMap r = random_map(rng, 5, 6, 8);
    const auto hp = hybrid_pool(r);
    const auto gap = global_avg_pool(r);
    for (std::size_t c = 0; c < 5; ++c)
      CHECK(hp[c] >= gap[c]);

    // channel permutation commutes with pooling
    std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    FeatureMap shuffled(5, 6, 8);
    for (std::size_t c = 0; c < 5; ++c)
      std::copy(r.channel(perm[c]).begin(), r.channel(perm[c]).end(),
                shuffled.values.begin() + c * 48);
    const auto hp2 = hybrid_pool(shuffled);
    const auto gap2 = global_avg_pool(shuffled);
    for (std::size_t c = 0; c < 5; ++c) {
      CHECK(hp2[c] == hp[perm[c]]);
      CHECK(gap2[c] == gap[perm[c]]);
    }
  }
}

}
