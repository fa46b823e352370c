#pragma once

#include <cstdint>
#include <span>

namespace pomfq {

/// Two-sided Fisher exact test on the 2x2 table [[w1, l1], [w2, l2]]: the sum
/// of probabilities of all tables with the same margins that are no more
/// likely than the observed one. Degenerate margins give 1.
double fisher_exact(std::uint64_t w1, std::uint64_t l1, std::uint64_t w2, std::uint64_t l2);

/// Hypergeometric probability of the table with top-left cell `a` given the margins.
double hypergeometric_pmf(std::uint64_t a, std::uint64_t row1, std::uint64_t col1, std::uint64_t total);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Unpaired two-sided t-test with unequal variances (Welch–Satterthwaite df).
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

double sample_mean(std::span<const double> x);
double sample_variance(std::span<const double> x);  // n - 1 denominator

}  // namespace pomfq
