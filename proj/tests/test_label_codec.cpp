#include <doctest.h>

#include <algorithm>
#include <random>

#include "dldl/errors.hpp"
#include "dldl/label_codec.hpp"
#include "oracles.hpp"

using namespace dldl;

TEST_SUITE("label_codec") {

TEST_CASE("grid construction") {
  CHECK(make_label_space(0, 100, 1).size() == 101);
  CHECK(make_label_space(1, 5, 0.1).size() == 41);
  const LabelSpace two = make_label_space(0, 1, 1);
  CHECK(two.labels() == std::vector<double>{0.0, 1.0});

  const LabelSpace frac = make_label_space(1, 5, 0.1);
  const auto labels = frac.labels();
  CHECK(labels.front() == 1.0);
  CHECK(labels.back() == 5.0);
  for (std::size_t i = 0; i + 1 < labels.size(); ++i)
    CHECK(std::abs(labels[i + 1] - labels[i] - 0.1) < 1e-12);

  CHECK_THROWS_AS(make_label_space(0, 1, 0.3), DegenerateGrid);
  CHECK_THROWS_AS(make_label_space(0, 1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_label_space(0, 1, -1.0), InvalidArgument);
  CHECK_THROWS_AS(make_label_space(1, 1, 1.0), InvalidArgument);
}

TEST_CASE("nearest index breaks ties downward") {
  const LabelSpace s = make_label_space(0, 100, 1);
  CHECK(s.nearest_index(49.6) == 50);
  CHECK(s.nearest_index(49.5) == 49);
  CHECK(s.nearest_index(49.4) == 49);
  CHECK(s.nearest_index(-3) == 0);
  CHECK(s.nearest_index(250) == 100);
}

TEST_CASE("gaussian distribution encoding") {
  const LabelSpace s = make_label_space(0, 100, 1);
  const Distribution d = encode_distribution(50, 2, s);
  CHECK(std::abs(d.probs[49] - d.probs[51]) < 1e-12);
  CHECK(std::max_element(d.probs.begin(), d.probs.end()) - d.probs.begin() == 50);
  // closed-form Gaussian on the grid, renormalized (30-digit evaluation)
  CHECK(d.probs[50] == doctest::Approx(0.19947114020071634).epsilon(1e-13));
  const auto ref = oracle::gaussian_on_grid(50, 2, 0, 1, 101);
  for (std::size_t k = 0; k < 101; ++k)
    CHECK(std::abs(d.probs[k] - ref[k]) < 1e-15);
  CHECK_FALSE(d.out_of_range);

  // ties between two nearest grid points go to the lower index
  const Distribution tie = encode_distribution(49.5, 1, s);
  CHECK(std::max_element(tie.probs.begin(), tie.probs.end()) - tie.probs.begin() == 49);

  CHECK_THROWS_AS(encode_distribution(50, 0, s), InvalidArgument);
  CHECK_THROWS_AS(encode_distribution(50, -1, s), InvalidArgument);
}

TEST_CASE("out-of-range targets are flagged and pile onto the edge") {
  const LabelSpace s = make_label_space(0, 100, 1);
  const Distribution d = encode_distribution(400, 2, s);
  CHECK(d.out_of_range);
  CHECK(d.probs.back() > 0.99);
  double total = 0.0;
  for (double p : d.probs)
    total += p;
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("distribution is normalized and nonnegative for random inputs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> y(-10, 110), sigma(0.05, 20);
  const LabelSpace s = make_label_space(0, 100, 1);
  for (int i = 0; i < 500; ++i) {
    const Distribution d = encode_distribution(y(rng), sigma(rng), s);
    double total = 0.0;
    for (double p : d.probs) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("closed-form c.d.f.") {
  const LabelSpace s = make_label_space(0, 100, 1);
  const CdfVector c = encode_cdf(50, 2, s);
  CHECK(c.values[50] == 0.5);
  CHECK(c.values[52] == doctest::Approx(0.8413447460685429).epsilon(1e-12));
  CHECK(std::abs(normal_cdf(1.0) - 0.8413447460685429) < 1e-7);
  CHECK(encode_cdf(50, 0.01, s).values[51] >= 1 - 1e-10);
  CHECK_THROWS_AS(encode_cdf(50, 0, s), InvalidArgument);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> y(-20, 120), sigma(1e-3, 30);
  for (int i = 0; i < 200; ++i) {
    const auto v = encode_cdf(y(rng), sigma(rng), s).values;
    CHECK(std::is_sorted(v.begin(), v.end()));
  }
}

TEST_CASE("exact ranking encoding") {
  const LabelSpace s = make_label_space(0, 100, 1);
  const RankingVector r = encode_ranking(50, s);
  REQUIRE(r.values.size() == 100);
  for (std::size_t j = 0; j < 100; ++j)
    CHECK(r.values[j] == (j < 50 ? 1.0 : 0.0));
  for (double v : encode_ranking(0, s).values)
    CHECK(v == 0.0);
  for (double v : encode_ranking(100, s).values)
    CHECK(v == 1.0);
  CHECK_THROWS_AS(encode_ranking(-0.5, s), InvalidArgument);
  CHECK_THROWS_AS(encode_ranking(100.5, s), InvalidArgument);

  // monotone prefix; number of ones = #labels strictly below y
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> y(0, 100);
  for (int i = 0; i < 300; ++i) {
    const double t = y(rng);
    const auto v = encode_ranking(t, s).values;
    CHECK(std::is_sorted(v.rbegin(), v.rend()));
    const auto ones = static_cast<std::size_t>(std::count(v.begin(), v.end(), 1.0));
    CHECK(ones == static_cast<std::size_t>(std::ceil(t)));
  }
}

TEST_CASE("cumulate is the running prefix sum") {
  const LabelSpace s = make_label_space(0, 9, 1);
  Distribution delta{s, std::vector<double>(10, 0.0)};
  delta.probs[4] = 1.0;
  const auto step = cumulate(delta).values;
  for (std::size_t k = 0; k < 10; ++k)
    CHECK(step[k] == (k < 4 ? 0.0 : 1.0));

  Distribution uniform{s, std::vector<double>(10, 0.1)};
  const auto ramp = cumulate(uniform).values;
  for (std::size_t k = 0; k < 10; ++k)
    CHECK(ramp[k] == doctest::Approx((k + 1) / 10.0).epsilon(1e-14));

  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    Distribution d{s, oracle::random_simplex(rng, 10)};
    const auto c = cumulate(d).values;
    double running = 0.0;
    for (std::size_t k = 0; k < 10; ++k) {
      running += d.probs[k];
      CHECK(std::abs(c[k] - running) < 1e-14);
    }
    CHECK(std::abs(c.back() - 1.0) < 1e-12);
  }
}

TEST_CASE("prefix sum tracks the closed-form c.d.f. within half a grid cell of mass") {
  const LabelSpace s = make_label_space(0, 100, 1);
  const Distribution d = encode_distribution(50, 2, s);
  const auto c = cumulate(d).values;
  const auto e = encode_cdf(50, 2, s).values;
  const double bound = 0.5 * s.step * *std::max_element(d.probs.begin(), d.probs.end());
  double gap = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k)
    gap = std::max(gap, std::abs(c[k] - e[k]));
  CHECK(gap <= bound + 1e-12);
  // the bound is attained at the mean, where the prefix sum takes the whole central cell
  CHECK(gap == doctest::Approx(0.09973557010035817).epsilon(1e-10));
}

TEST_CASE("ranking from distribution") {
  const LabelSpace s = make_label_space(0, 100, 1);
  Distribution delta0{s, std::vector<double>(101, 0.0)};
  delta0.probs[0] = 1.0;
  for (double v : ranking_from_distribution(delta0).values)
    CHECK(v == 0.0);

  const LabelSpace two = make_label_space(0, 1, 1);
  const auto half = ranking_from_distribution({two, {0.5, 0.5}}).values;
  REQUIRE(half.size() == 1);
  CHECK(half[0] == 0.5);

  for (double v : ranking_from_distribution(encode_distribution(37.3, 3, s)).values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("ranking equivalence at small sigma") {
  const LabelSpace s = make_label_space(0, 100, 1);
  auto gap = [&](double y, double sigma) {
    const auto exact = encode_ranking(y, s).values;
    const auto approx = ranking_from_distribution(encode_distribution(y, sigma, s)).values;
    double g = 0.0;
    for (std::size_t j = 0; j < exact.size(); ++j)
      g = std::max(g, std::abs(exact[j] - approx[j]));
    return g;
  };
  // On-grid targets: the prefix sum saturates on the right side of the threshold.
  for (double y : {1.0, 25.0, 50.0, 99.0})
    CHECK(gap(y, 0.1) < 1e-5);

  // Half-grid targets split the discrete mass evenly between the two
  // neighbours, so the prefix sum sits at exactly 0.5 on the threshold the
  // target crosses, whatever sigma is.
  for (double sigma : {0.1, 0.5, 1.0})
    CHECK(gap(50.5, sigma) == doctest::Approx(0.5).epsilon(1e-12));

  // The closed-form c.d.f. has no such split and converges as sigma -> 0.
  auto continuous_gap = [&](double y, double sigma) {
    const auto exact = encode_ranking(y, s).values;
    const auto cdf = encode_cdf(y, sigma, s).values;
    double g = 0.0;
    for (std::size_t j = 0; j < exact.size(); ++j)
      g = std::max(g, std::abs(exact[j] - (1.0 - cdf[j])));
    return g;
  };
  CHECK(continuous_gap(50.5, 0.1) == doctest::Approx(2.866515718791939e-7).epsilon(1e-6));
  CHECK(continuous_gap(50.5, 0.5) < continuous_gap(50.5, 1.0));
  CHECK(continuous_gap(50.5, 0.1) < continuous_gap(50.5, 0.5));
}

}
