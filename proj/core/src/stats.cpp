#include "voterperc/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace voterperc {

double z_for_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double level) {
  if (n == 0) return {0.0, 1.0};
  if (successes > n) throw std::invalid_argument("successes exceed trials");
  const double z = z_for_level(level);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
  // Pin the degenerate ends exactly.
  if (successes == 0) out.lo = 0.0;
  if (successes == n) out.hi = 1.0;
  return out;
}

EstimateWithCI proportion_estimate(std::uint64_t successes, std::uint64_t n,
                                   double level) {
  EstimateWithCI e;
  e.n = n;
  e.level = level;
  if (n == 0) {
    e.ci_hi = 1.0;
    return e;
  }
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  e.estimate = p;
  e.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  const auto w = wilson_interval(successes, n, level);
  e.ci_lo = w.lo;
  e.ci_hi = w.hi;
  return e;
}

double RunningMoments::variance() const {
  if (n < 2) return 0.0;
  const double nn = static_cast<double>(n);
  const double v = (sum_sq - sum * sum / nn) / (nn - 1.0);
  return std::max(0.0, v);
}

EstimateWithCI mean_estimate(const RunningMoments& m, double level) {
  EstimateWithCI e;
  e.n = m.n;
  e.level = level;
  e.estimate = m.mean();
  e.std_error = m.n ? std::sqrt(m.variance() / static_cast<double>(m.n)) : 0.0;
  const double z = z_for_level(level);
  e.ci_lo = e.estimate - z * e.std_error;
  e.ci_hi = e.estimate + z * e.std_error;
  return e;
}

std::vector<double> isotonic_regression(std::span<const double> y,
                                        std::span<const double> weights) {
  if (!weights.empty() && weights.size() != y.size()) {
    throw std::invalid_argument("weights must match values");
  }
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!(w > 0.0)) throw std::invalid_argument("weights must be positive");
    blocks.push_back({y[i], w, 1});
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const double tw = a.weight + b.weight;
      a.mean = (a.mean * a.weight + b.mean * b.weight) / tw;
      a.weight = tw;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope needs two or more (x, y) pairs");
  }
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("loglog_slope needs positive values");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double n = static_cast<double>(x.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope needs two distinct x");
  return sxy / sxx;
}

}  // namespace voterperc
