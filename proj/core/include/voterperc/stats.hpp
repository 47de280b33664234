#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace voterperc {

inline constexpr double kDefaultLevel = 0.99;

// A Monte Carlo estimate with its sample count, standard error, and a
// two-sided confidence interval at `level`.
struct EstimateWithCI {
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t n = 0;
  double level = kDefaultLevel;

  bool overlaps(const EstimateWithCI& o) const {
    return ci_lo <= o.ci_hi && o.ci_lo <= ci_hi;
  }
};

// Two-sided standard normal quantile: P(|Z| <= z) = level.
double z_for_level(double level);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double level);

// Proportion with a Wilson interval.
EstimateWithCI proportion_estimate(std::uint64_t successes, std::uint64_t n,
                                   double level = kDefaultLevel);

// Count, sum, and sum of squares. Merging is commutative and associative up
// to floating-point rounding; callers that need bit-identical results merge
// in a fixed order.
struct RunningMoments {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const RunningMoments& o) {
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  // Unbiased sample variance.
  double variance() const;
};

// Mean with a normal-approximation interval.
EstimateWithCI mean_estimate(const RunningMoments& m,
                             double level = kDefaultLevel);

// Pool-adjacent-violators fit: the nondecreasing sequence closest to `y` in
// weighted least squares. Weights default to 1.
std::vector<double> isotonic_regression(std::span<const double> y,
                                        std::span<const double> weights = {});

// Least-squares slope of log y against log x. Requires at least two points,
// all coordinates positive, and two distinct x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace voterperc
