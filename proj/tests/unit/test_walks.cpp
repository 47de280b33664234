#include <doctest.h>

#include <cmath>

#include "voterperc/parallel.hpp"
#include "voterperc/walks.hpp"

using namespace voterperc;

TEST_CASE("jump kernel is the punctured l1 ball") {
  CHECK(JumpKernel(3, 1).offsets().size() == 6);
  CHECK(JumpKernel(3, 2).offsets().size() == 24);
  CHECK(JumpKernel(2, 3).offsets().size() == 24);
  const JumpKernel k(3, 2);
  for (const auto& o : k.offsets()) {
    CHECK(l1_norm(o) >= 1);
    CHECK(l1_norm(o) <= 2);
  }
}

TEST_CASE("walk system keeps time and occupancy") {
  const std::vector<Point> starts{Point{0, 0, 0}, Point{5, 0, 0}};
  WalkSystem ws(1, starts, Rng(4));
  CHECK(ws.alive_count() == 2);
  CHECK(ws.occupant(Point{5, 0, 0}) == 1);
  double last = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto ev = ws.advance_to_next_event();
    CHECK(ev.time >= last);
    CHECK(l1_dist(ev.from, ev.to) == 1);
    last = ev.time;
  }
  ws.kill(0);
  CHECK_FALSE(ws.alive(0));
  CHECK_THROWS_AS(ws.step_walker(0), std::invalid_argument);
  const auto none = ws.advance_until(ws.time());
  CHECK_FALSE(none.has_value());
}

TEST_CASE("meeting estimates are reproducible and worker invariant") {
  TruncationPolicy pol;
  pol.escape_factor = 4.0;
  const Point x{0, 0, 0}, y{2, 0, 0};
  const auto a = estimate_h(x, y, 1, 2000, pol, 17);
  const auto b = estimate_h(x, y, 1, 2000, pol, 17);
  const ParallelMap pool(3);
  const auto c = estimate_h(x, y, 1, 2000, pol, 17, pool);
  CHECK(a.met == b.met);
  CHECK(a.met == c.met);
  CHECK(a.met + a.escaped + a.timed_out == 2000);
  CHECK_THROWS(estimate_h(x, x, 1, 10, pol, 1));
}

TEST_CASE("nearest-neighbour meeting from adjacent sites matches the return probability") {
  // Two rate-1 walks from 0 and e1 meet iff their difference, a simple
  // random walk, ever returns; in Z^3 that probability is 0.3405.
  TruncationPolicy pol;
  pol.escape_radius = 32;
  pol.t_max = 1e9;
  const auto m = estimate_h(Point{0, 0, 0}, Point{1, 0, 0}, 1, 10000, pol, 5);
  CHECK(std::abs(m.estimate.estimate - 0.3405) < 0.02);
}

TEST_CASE("canonical difference") {
  CHECK(canonical_difference(Point{-1, 3, 0}) == Point{3, 1, 0});
  CHECK(canonical_difference(Point{2, -2, 5}) == Point{5, 2, 2});
}

TEST_CASE("remeet table") {
  RemeetTable t(3, 1, {{1, 0.3, 0.32, 1000}, {2, 0.15, 0.17, 1000}, {4, 0.07, 0.08, 1000}});
  CHECK(t.q(1) == doctest::Approx(0.32));
  CHECK(t.q(0.5) == doctest::Approx(0.32));
  CHECK(t.q(3) < t.q(2));
  CHECK(t.q(8) < t.q(4));
  const long r = t.escape_radius_for(1e-2);
  CHECK(t.q(static_cast<double>(r)) < 1e-2);
  CHECK(t.q(static_cast<double>(r - 1)) >= 1e-2);
  const auto back = RemeetTable::from_csv(t.to_csv());
  CHECK(back.dim() == 3);
  CHECK(back.range() == 1);
  REQUIRE(back.rows().size() == 3);
  CHECK(back.rows()[1].ci_hi == doctest::Approx(0.17));
}

TEST_CASE("meeting cache is symmetric and bounded in the tail") {
  TruncationPolicy pol;
  pol.escape_factor = 4.0;
  MeetingProbabilityCache cache(3, 1, 500, pol, 9, 2);
  const auto a = cache.at(Point{1, -2, 0});
  const auto b = cache.at(Point{0, 2, 1});
  CHECK(a.point == b.point);
  CHECK(a.hi == b.hi);
  const auto far = cache.at(Point{9, 0, 0});
  CHECK(far.lo == 0.0);
  CHECK(far.hi >= far.point);
  CHECK(far.hi < a.hi);
}
