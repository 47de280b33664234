#include <doctest.h>

#include <set>

#include "voterperc/coalescence.hpp"

using namespace voterperc;

namespace {

std::vector<Point> random_set(Rng& rng, int n, int r) {
  std::set<Point> s;
  while (static_cast<int>(s.size()) < n) {
    Point p = Point::zero(3);
    for (int i = 0; i < 3; ++i) p[i] = static_cast<int>(uniform_below(rng, 2 * r + 1)) - r;
    s.insert(p);
  }
  return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("merge parity rules") {
  MarkedPartition pi({Point{0, 0, 0}, Point{1, 0, 0}, Point{2, 0, 0}});
  CHECK(pi.mark_count() == 3);
  const auto m1 = pi.merge(1, 0);
  CHECK(m1.both_odd);
  CHECK(m1.survivor == 0);  // equal parity: the smaller point
  CHECK(pi.block_size(0) == 2);
  const auto m2 = pi.merge(0, 2);
  CHECK_FALSE(m2.both_odd);
  CHECK(m2.survivor == 2);  // the odd block wins
  CHECK(pi.label(0) == 2);
  CHECK(pi.label(1) == 2);
  CHECK(pi.mark_count() == 1);
  CHECK(pi.valid());
  CHECK(pi.odd_marks() == std::vector<MarkedPartition::Index>{2});
}

TEST_CASE("merge rejects non-marks") {
  MarkedPartition pi({Point{0, 0}, Point{1, 0}, Point{0, 1}});
  CHECK_THROWS_AS(pi.merge(0, 0), std::invalid_argument);
  pi.merge(0, 1);
  CHECK_THROWS_AS(pi.merge(1, 2), std::invalid_argument);
  const auto q = merge_blocks(pi, Point{0, 0}, Point{0, 1});
  CHECK(q.mark_count() == 1);
  CHECK(pi.mark_count() == 2);
}

TEST_CASE("single point stops at once") {
  Rng rng(1);
  const std::vector<Point> a{Point{0, 0, 0}};
  const auto run = run_coalescence(a, 2, StoppingPolicy{}, rng);
  CHECK(run.reason == StopReason::kSingleBlock);
  CHECK(run.merged_away() == 0);
}

TEST_CASE("fixed horizon") {
  Rng rng(2);
  const std::vector<Point> a{Point{0, 0, 0}, Point{9, 0, 0}, Point{0, 9, 0}};
  const auto run = run_coalescence(a, 1, StoppingPolicy::at_time(0.5), rng);
  if (run.reason == StopReason::kHorizon) CHECK(run.stop_time == 0.5);
  CHECK(run.stop_time <= 0.5);
  CHECK(run.terminal.valid());
  CHECK(run.positions.size() == 3);
}

TEST_CASE("coupling identities hold on random runs") {
  reset_coupling_audit();
  Rng rng(3);
  StoppingPolicy pol = StoppingPolicy::at_time(20.0);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_set(rng, 2 + static_cast<int>(uniform_below(rng, 7)), 2);
    const auto run = run_coalescence(a, 1 + static_cast<int>(uniform_below(rng, 3)), pol, rng);
    CHECK(run.terminal.valid());
    const auto odd = run.terminal.odd_marks();
    CHECK((a.size() - odd.size()) % 2 == 0);
    CHECK(run.annihilations.size() * 2 == a.size() - odd.size());
    for (const auto& [x, y] : run.annihilations) CHECK(a[x] < a[y]);
  }
  const auto snap = coupling_audit();
  CHECK(snap.runs == 200);
  CHECK(snap.violations == 0);
}

TEST_CASE("annihilating view at time zero is all of A") {
  Rng rng(4);
  const std::vector<Point> a{Point{0, 0, 0}, Point{1, 0, 0}, Point{3, 0, 0}};
  const auto run = run_coalescence(a, 1, StoppingPolicy::at_time(5.0), rng);
  CHECK(annihilating_view(run, 0.0).odd_marks.size() == 3);
  CHECK(annihilating_view(run, 1e9).odd_marks == run.terminal.odd_marks());
}

TEST_CASE("invalid ground sets throw") {
  Rng rng(5);
  const std::vector<Point> dup{Point{0, 0}, Point{0, 0}};
  CHECK_THROWS(run_coalescence(dup, 1, StoppingPolicy{}, rng));
  CHECK_THROWS(run_coalescence(std::vector<Point>{}, 1, StoppingPolicy{}, rng));
}
