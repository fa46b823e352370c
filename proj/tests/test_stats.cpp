#include <doctest.h>

#include <cmath>
#include <vector>

#include "pomfq/errors.hpp"
#include "pomfq/rng.hpp"
#include "pomfq/stats.hpp"

using namespace pomfq;

namespace {

using u128 = unsigned __int128;

u128 choose(unsigned n, unsigned k) {
  if (k > n) return 0;
  u128 c = 1;
  for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Exact integer enumeration of all tables with the observed margins.
double fisher_oracle(unsigned w1, unsigned l1, unsigned w2, unsigned l2) {
  const unsigned r1 = w1 + l1, r2 = w2 + l2, c1 = w1 + w2, n = r1 + r2;
  if (r1 == 0 || r2 == 0 || c1 == 0 || c1 == n) return 1.0;
  const u128 observed = choose(c1, w1) * choose(n - c1, r1 - w1);
  u128 tail = 0;
  for (unsigned a = 0; a <= std::min(r1, c1); ++a) {
    if (r1 - a > n - c1) continue;
    const u128 p = choose(c1, a) * choose(n - c1, r1 - a);
    if (p <= observed) tail += p;
  }
  return std::min(1.0, static_cast<double>(tail) / static_cast<double>(choose(n, r1)));
}

double t_density(double x, double df) {
  return std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI) *
         std::pow(1 + x * x / df, -(df + 1) / 2);
}

// Two-sided p by Simpson integration of the density over [0, |t|].
double t_pvalue_oracle(double t, double df) {
  const int n = 20000;
  const double h = std::fabs(t) / n;
  double s = t_density(0, df) + t_density(std::fabs(t), df);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * t_density(i * h, df);
  return 1.0 - 2.0 * s * h / 3.0;
}

}  // namespace

TEST_CASE("fisher examples") {
  CHECK(fisher_exact(10, 0, 0, 10) == doctest::Approx(2.0 / 184756.0).epsilon(1e-9));
  CHECK(fisher_exact(5, 5, 5, 5) == doctest::Approx(1.0));
  CHECK(fisher_exact(0, 0, 3, 4) == 1.0);
  CHECK(fisher_exact(3, 0, 4, 0) == 1.0);
  CHECK(fisher_exact(3, 7, 8, 2) == doctest::Approx(fisher_exact(2, 8, 7, 3)).epsilon(1e-12));
}

TEST_CASE("fisher matches exhaustive enumeration for small margins") {
  int checked = 0;
  double worst = 0.0;
  for (unsigned w1 = 0; w1 <= 12; ++w1)
    for (unsigned l1 = 0; l1 <= 12; ++l1)
      for (unsigned w2 = 0; w2 <= 12; ++w2)
        for (unsigned l2 = 0; l2 <= 12; ++l2) {
          worst = std::max(worst, std::fabs(fisher_exact(w1, l1, w2, l2) - fisher_oracle(w1, l1, w2, l2)));
          ++checked;
        }
  CHECK(checked == 13 * 13 * 13 * 13);
  CHECK(worst < 1e-9);
}

TEST_CASE("welch examples") {
  const std::vector<double> a{1, 2, 3, 4};
  const auto same = welch_t_test(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == doctest::Approx(1.0));
  const std::vector<double> zeros{0, 0, 0, 0, 0};
  const std::vector<double> tens{10, 10, 10, 10, 10.0001};
  CHECK(welch_t_test(zeros, tens).p < 1e-6);
  const auto flat = welch_t_test(zeros, zeros);
  CHECK(flat.t == 0.0);
  CHECK(flat.p == 1.0);
  const std::vector<double> b{2, 4, 1, 7, 5};
  const auto ab = welch_t_test(a, b), ba = welch_t_test(b, a);
  CHECK(ab.t == doctest::Approx(-ba.t));
  CHECK(ab.p == doctest::Approx(ba.p));
  CHECK_THROWS_AS(welch_t_test(std::vector<double>{1}, b), ArgumentError);
  CHECK_THROWS_AS(welch_t_test(std::vector<double>{1, NAN}, b), ArgumentError);
}

TEST_CASE("welch p-value matches numerical integration") {
  Rng r(12);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> a(3 + r.uniform_index(10)), b(3 + r.uniform_index(10));
    for (auto& x : a) x = r.normal();
    for (auto& x : b) x = 0.5 + 2.0 * r.normal();
    const auto res = welch_t_test(a, b);
    CHECK(res.p == doctest::Approx(t_pvalue_oracle(res.t, res.df)).epsilon(1e-6));
  }
}
