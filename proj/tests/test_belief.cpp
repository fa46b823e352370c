#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "pomfq/belief.hpp"
#include "pomfq/errors.hpp"
#include "pomfq/rng.hpp"

using namespace pomfq;

TEST_CASE("rng streams are reproducible and splits are distinct") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  const Rng root(7);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng child = root.split(i);
    for (int k = 0; k < 64; ++k) firsts.insert(child());
  }
  CHECK(firsts.size() == 20 * 64);
  Rng c(1);
  const auto saved = c.state();
  const auto x = c();
  c.set_state(saved);
  CHECK(c() == x);
}

TEST_CASE("rng distributions") {
  Rng r(3);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::fabs(sum / n) < 0.01);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
  for (double shape : {0.3, 1.0, 4.5}) {
    double m = 0.0, v = 0.0;
    std::vector<double> xs(n);
    for (auto& x : xs) x = r.gamma(shape);
    for (double x : xs) m += x;
    m /= n;
    for (double x : xs) v += (x - m) * (x - m);
    v /= n;
    CHECK(m == doctest::Approx(shape).epsilon(0.03));
    CHECK(v == doctest::Approx(shape).epsilon(0.05));
  }
  CHECK_THROWS_AS(r.uniform_index(0), ArgumentError);
  std::array<int, 3> hist{};
  for (int i = 0; i < 30000; ++i) ++hist[r.uniform_index(3)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 400);
}

TEST_CASE("dirichlet update examples") {
  MeanActionBelief b(std::vector<double>{1, 1, 1});
  const std::vector<std::uint32_t> counts{2, 0, 1};
  b.update(counts);
  CHECK(std::vector<double>(b.concentration().begin(), b.concentration().end()) == std::vector<double>{3, 1, 2});
  CHECK(b.sample_count_total() == 3);
  const auto m = b.mean();
  CHECK(m[0] == doctest::Approx(0.5));
  CHECK(m[1] == doctest::Approx(1.0 / 6));

  MeanActionBelief d(std::vector<double>{4, 2});
  const std::vector<std::uint32_t> none{0, 0};
  d.update(none, 0.5);
  CHECK(d.concentration()[0] == 2.0);
  CHECK(d.concentration()[1] == 1.0);
  MeanActionBelief tiny(std::vector<double>{1e-6, 1.0});
  tiny.update(none, 0.5);
  CHECK(tiny.concentration()[0] == kConcentrationFloor);

  const std::vector<std::uint32_t> wrong{1, 2, 3};
  CHECK_THROWS_AS(d.update(wrong), DimensionError);
  CHECK_THROWS_AS(d.update(none, 0.0), ArgumentError);
  CHECK_THROWS_AS(d.update(none, 1.5), ArgumentError);
  CHECK_THROWS_AS(MeanActionBelief(1), ArgumentError);
}

TEST_CASE("dirichlet update is order independent without decay") {
  Rng r(5);
  MeanActionBelief one(5), two(5);
  std::vector<std::vector<std::uint32_t>> batches;
  for (int i = 0; i < 20; ++i) {
    std::vector<std::uint32_t> c(5);
    for (auto& x : c) x = static_cast<std::uint32_t>(r.uniform_index(4));
    batches.push_back(c);
  }
  for (const auto& c : batches) one.update(c);
  for (auto it = batches.rbegin(); it != batches.rend(); ++it) two.update(*it);
  CHECK(one == two);
}

TEST_CASE("action counts skip agents without an action") {
  const std::vector<int> acts{0, 2, -1, 2};
  CHECK(action_counts(acts, 3) == std::vector<std::uint32_t>{1, 0, 2});
}

TEST_CASE("sampled mean action lies on the simplex and approaches the posterior mean") {
  Rng r(11);
  MeanActionBelief b(std::vector<double>{2, 5, 3});
  for (std::size_t s : {1, 10, 1000}) {
    const auto a = sample_mean_action(b, s, r);
    CHECK(std::accumulate(a.begin(), a.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double x : a) CHECK(x >= 0.0);
  }
  const auto a = sample_mean_action(b, 20000, r);
  const auto m = b.mean();
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(a[i] - m[i]) < 0.01);
  CHECK_THROWS_AS(sample_mean_action(b, 0, r), ArgumentError);
}

TEST_CASE("frequentist mean action") {
  const std::vector<int> acts{0, 0, 1, 3};
  const auto m = frequentist_mean_action(acts, 4);
  REQUIRE(m);
  CHECK(*m == std::vector<double>{0.5, 0.25, 0.0, 0.25});
  CHECK_FALSE(frequentist_mean_action(std::vector<int>{}, 4));
  const std::vector<std::vector<double>> hots{{1, 0}, {0, 1}, {0, 1}, {0, 1}};
  const auto h = frequentist_mean_action(hots);
  REQUIRE(h);
  CHECK((*h)[1] == doctest::Approx(0.75));
}

TEST_CASE("gamma projection update") {
  VisibilityBelief b = make_visibility_prior(1.0, 1.0);
  b = gamma_posterior_update(b, 2.0);
  // rate = 1 + 2 - 2 / (1 / 1) = 1
  CHECK(b.shape == 1.5);
  CHECK(b.rate == doctest::Approx(1.0));
  CHECK(b.point_estimate == doctest::Approx(1.5));
  Rng r(2);
  VisibilityBelief c = make_visibility_prior();
  for (int k = 1; k <= 200; ++k) {
    c = gamma_posterior_update(c, r.uniform() * 10.0);
    CHECK(c.shape == 1.0 + 0.5 * k);
    CHECK(c.rate >= kRateFloor);
  }
  CHECK_THROWS_AS(gamma_posterior_update(c, -1.0), ArgumentError);
  const double lam = sample_lambda(c, 100, r);
  CHECK(lam > 0.0);
}

TEST_CASE("visibility probability and Hoeffding bound") {
  CHECK(visibility_prob(0.0) == doctest::Approx(1.0));
  CHECK(visibility_prob(1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(visibility_prob(1.0, {2.0}) == doctest::Approx(2.0 * std::exp(-2.0)));
  CHECK(hoeffding_bound(100, 0.9) == doctest::Approx(std::sqrt(std::log(2.0 / 0.9) / 200.0)));
  CHECK_THROWS_AS(hoeffding_bound(0, 0.5), ArgumentError);
  CHECK_THROWS_AS(hoeffding_bound(10, 1.0), ArgumentError);
}
