#include "pomfq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "pomfq/errors.hpp"

namespace pomfq {

namespace {

double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double hypergeometric_pmf(std::uint64_t a, std::uint64_t row1, std::uint64_t col1, std::uint64_t total) {
  if (row1 > total || col1 > total) throw ArgumentError("hypergeometric_pmf: margins exceed total");
  const std::uint64_t lo = row1 + col1 > total ? row1 + col1 - total : 0;
  const std::uint64_t hi = std::min(row1, col1);
  if (a < lo || a > hi) return 0.0;
  return std::exp(log_choose(col1, a) + log_choose(total - col1, row1 - a) - log_choose(total, row1));
}

double fisher_exact(std::uint64_t w1, std::uint64_t l1, std::uint64_t w2, std::uint64_t l2) {
  const std::uint64_t row1 = w1 + l1;
  const std::uint64_t row2 = w2 + l2;
  const std::uint64_t col1 = w1 + w2;
  const std::uint64_t total = row1 + row2;
  if (row1 == 0 || row2 == 0 || col1 == 0 || col1 == total) return 1.0;
  const double observed = hypergeometric_pmf(w1, row1, col1, total);
  const double cutoff = observed * (1.0 + 1e-7);
  const std::uint64_t lo = row1 + col1 > total ? row1 + col1 - total : 0;
  const std::uint64_t hi = std::min(row1, col1);
  double p = 0.0;
  for (std::uint64_t a = lo; a <= hi; ++a) {
    const double pa = hypergeometric_pmf(a, row1, col1, total);
    if (pa <= cutoff) p += pa;
  }
  return std::min(1.0, p);
}

double sample_mean(std::span<const double> x) {
  if (x.empty()) throw ArgumentError("sample_mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw ArgumentError("sample_variance: need at least two values");
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ArgumentError("welch_t_test: each sample needs at least two values");
  for (double v : a)
    if (!std::isfinite(v)) throw ArgumentError("welch_t_test: non-finite value");
  for (double v : b)
    if (!std::isfinite(v)) throw ArgumentError("welch_t_test: non-finite value");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = sample_mean(a);
  const double mb = sample_mean(b);
  const double sa = sample_variance(a) / na;
  const double sb = sample_variance(b) / nb;
  const double se2 = sa + sb;
  TTestResult r;
  if (se2 == 0.0) {
    if (ma == mb) return r;
    r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.df = na + nb - 2.0;
    r.p = 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  const boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t))));
  return r;
}

}  // namespace pomfq
