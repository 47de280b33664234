#include <doctest.h>

#include <stdexcept>

#include "voterperc/bounds.hpp"

using namespace voterperc;

namespace {

EstimateWithCI interval(double lo, double hi) {
  EstimateWithCI e;
  e.estimate = 0.5 * (lo + hi);
  e.ci_lo = lo;
  e.ci_hi = hi;
  return e;
}

MeetingProbabilityCache small_cache(int R) {
  TruncationPolicy pol;
  pol.escape_factor = 4.0;
  return MeetingProbabilityCache(3, R, 2000, pol, 5, 2);
}

}  // namespace

TEST_CASE("verdict composition") {
  CHECK(compose_verdict(interval(0.1, 0.2), 0.3, 0.4) == Verdict::kPass);
  CHECK(compose_verdict(interval(0.5, 0.6), 0.3, 0.4) == Verdict::kFail);
  CHECK(compose_verdict(interval(0.25, 0.35), 0.3, 0.4) == Verdict::kInconclusive);
  CHECK(to_string(Verdict::kInconclusive) == "inconclusive");
}

TEST_CASE("exact product-measure probabilities") {
  const auto E = CylinderEvent::pattern({Point{0, 0, 0}, Point{1, 0, 0}}, {1, 1});
  CHECK(exact_pi_alpha(E, 0.3) == doctest::Approx(0.09));
  CHECK(exact_pi_alpha(CylinderEvent::everything(3), 0.3) == doctest::Approx(1.0));
  std::vector<Point> big;
  for (int i = 0; i < 21; ++i) big.push_back(Point{i, 0, 0});
  const CylinderEvent wide(big, [](std::span<const std::uint8_t>) { return true; });
  CHECK_THROWS_AS(exact_pi_alpha(wide, 0.5), std::length_error);
}

TEST_CASE("pair product of a single site is empty") {
  auto h = small_cache(2);
  const std::vector<Point> one{Point{0, 0, 0}};
  const auto p = pair_product(one, 3.0, h);
  CHECK(p.lo == 1.0);
  CHECK(p.hi == 1.0);
  const std::vector<Point> two{Point{0, 0, 0}, Point{1, 0, 0}};
  const auto q = pair_product(two, 3.0, h);
  CHECK(q.lo <= q.point);
  CHECK(q.point <= q.hi);
  CHECK(q.point > 1.0);
}

TEST_CASE("exponential bound for a single site is an equality") {
  auto h = small_cache(2);
  const std::vector<Point> A{Point{0, 0, 0}};
  const auto r = check_exponential_eta(A, 2, 0.5, 100, StoppingPolicy::at_time(5), h, 1);
  CHECK(r.lhs.estimate == doctest::Approx(1.0));
  CHECK(r.rhs == doctest::Approx(1.0));
  CHECK(r.verdict == Verdict::kPass);
  CHECK_THROWS_AS(check_exponential_eta(A, 2, 1.5, 100, StoppingPolicy::at_time(5), h, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_exponential_eta(std::vector<Point>{}, 2, 0.5, 100,
                                        StoppingPolicy::at_time(5), h, 1),
                  std::invalid_argument);
}

TEST_CASE("exponential bound on a pair") {
  auto h = small_cache(2);
  const std::vector<Point> A{Point{0, 0, 0}, Point{1, 0, 0}};
  const auto r = check_exponential_eta(A, 2, 0.5, 4000, StoppingPolicy::at_time(20), h, 2);
  CHECK(r.lhs.estimate >= 1.0);
  CHECK(r.verdict != Verdict::kFail);
}

TEST_CASE("disjoint occurrence with one translate is exact") {
  auto h = small_cache(2);
  const auto E = CylinderEvent::pattern({Point{0, 0, 0}}, {1});
  const std::vector<Point> shifts{Point{0, 0, 0}};
  const auto r = check_disjointly(E, shifts, 0.3, 2, 1000, StoppingPolicy::at_time(5), h, 3);
  CHECK(r.lhs.estimate == doctest::Approx(0.3));
  CHECK(r.rhs == doctest::Approx(0.3));
  CHECK(r.verdict == Verdict::kPass);
}

TEST_CASE("disjoint occurrence input checks") {
  auto h = small_cache(2);
  const auto E = CylinderEvent::pattern({Point{0, 0, 0}, Point{1, 0, 0}}, {1, 1});
  const std::vector<Point> overlapping{Point{0, 0, 0}, Point{1, 0, 0}};
  CHECK_THROWS_AS(check_disjointly(E, overlapping, 0.5, 2, 10, StoppingPolicy::at_time(5), h, 1),
                  std::invalid_argument);
  const auto off = CylinderEvent::pattern({Point{1, 0, 0}}, {1});
  const std::vector<Point> one{Point{0, 0, 0}};
  CHECK_THROWS_AS(check_disjointly(off, one, 0.5, 2, 10, StoppingPolicy::at_time(5), h, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_disjointly(E, one, 0.0, 2, 10, StoppingPolicy::at_time(5), h, 1),
                  std::invalid_argument);
}

TEST_CASE("annulus crossing event") {
  const auto E = annulus_crossing_event(3, 1, 3);
  CHECK(E.base().size() == 343);
  const std::vector<std::uint8_t> open(343, 1), closed(343, 0);
  CHECK(E.test(open));
  CHECK_FALSE(E.test(closed));
}

TEST_CASE("report serialisation") {
  InequalityReport r;
  r.inequality = "disjointly";
  r.lhs = interval(0.1, 0.2);
  r.rhs = 0.3;
  r.rhs_lo = 0.25;
  r.rhs_hi = 0.35;
  r.margin = 0.05;
  r.verdict = Verdict::kPass;
  const auto js = report_to_json(r, {{"seed", "1"}});
  CHECK(js.find("\"schema_version\"") != std::string::npos);
  CHECK(js.find("\"pass\"") != std::string::npos);
  const std::vector<InequalityReport> rs{r};
  const auto csv = reports_to_csv(rs);
  CHECK(csv.find("id,inequality,params,lhs") != std::string::npos);
}
