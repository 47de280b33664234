#include <doctest.h>

#include <cmath>
#include <vector>

#include "voterperc/parallel.hpp"
#include "voterperc/rng.hpp"
#include "voterperc/stats.hpp"

using namespace voterperc;

TEST_CASE("normal quantiles") {
  CHECK(z_for_level(0.95) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(z_for_level(0.99) == doctest::Approx(2.575829).epsilon(1e-6));
  CHECK_THROWS(z_for_level(1.0));
}

TEST_CASE("Wilson interval") {
  const auto w = wilson_interval(50, 100, 0.95);
  CHECK(w.lo == doctest::Approx(0.4038).epsilon(1e-3));
  CHECK(w.hi == doctest::Approx(0.5962).epsilon(1e-3));
  CHECK(wilson_interval(0, 100, 0.99).lo == 0.0);
  CHECK(wilson_interval(100, 100, 0.99).hi == 1.0);
  CHECK_THROWS(wilson_interval(5, 4, 0.99));
  const auto e = proportion_estimate(30, 100);
  CHECK(e.estimate == doctest::Approx(0.3));
  CHECK(e.ci_lo < 0.3);
  CHECK(e.ci_hi > 0.3);
}

TEST_CASE("running moments") {
  RunningMoments m;
  for (double x : {1.0, 2.0, 3.0, 4.0}) m.add(x);
  CHECK(m.mean() == doctest::Approx(2.5));
  CHECK(m.variance() == doctest::Approx(5.0 / 3.0));
  const auto e = mean_estimate(m, 0.95);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("isotonic regression") {
  const std::vector<double> y{1, 3, 2, 4};
  const auto f = isotonic_regression(y);
  CHECK(f == std::vector<double>{1, 2.5, 2.5, 4});
  const std::vector<double> sorted{0, 0.1, 0.2};
  CHECK(isotonic_regression(sorted) == sorted);
  const std::vector<double> w{1, 3};
  const std::vector<double> z{2, 0};
  const auto g = isotonic_regression(z, w);
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[1] == doctest::Approx(0.5));
}

TEST_CASE("log-log slope") {
  std::vector<double> x{2, 4, 8, 16}, y;
  for (double v : x) y.push_back(3.0 / v);
  CHECK(loglog_slope(x, y) == doctest::Approx(-1.0));
  CHECK_THROWS(loglog_slope(std::vector<double>{1}, std::vector<double>{1}));
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  Rng a = make_stream(5, 7), b = make_stream(5, 7);
  CHECK(a() == b());
}

TEST_CASE("uniform_below is uniform") {
  Rng rng(3);
  constexpr int k = 6, n = 60000;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) ++counts[uniform_below(rng, k)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / k) * (c - n / k) / double(n / k);
  CHECK(chi2 < 20.5);  // chi-square, 5 dof, p = 0.001
}

TEST_CASE("parallel reductions do not depend on the worker count") {
  auto run = [](unsigned w) {
    const ParallelMap pool(w);
    return pool.map_reduce(
        10000, 0.0, [](std::size_t i) { return 1.0 / (1.0 + static_cast<double>(i)); },
        [](double& a, double b) { a += b; });
  };
  const double one = run(1);
  CHECK(run(2) == one);
  CHECK(run(5) == one);
  const ParallelMap pool(3);
  CHECK_THROWS(pool.for_each(100, [](std::size_t i) {
    if (i == 50) throw std::runtime_error("boom");
  }));
}
