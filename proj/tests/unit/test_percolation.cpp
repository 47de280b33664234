#include <doctest.h>

#include <stdexcept>

#include "oracles.hpp"
#include "voterperc/percolation.hpp"

using namespace voterperc;

TEST_CASE("union find") {
  UnionFind uf(5);
  uf.unite(0, 1);
  uf.unite(3, 4);
  CHECK(uf.same(0, 1));
  CHECK_FALSE(uf.same(1, 3));
  uf.unite(1, 4);
  CHECK(uf.size_of(3) == 4);
}

TEST_CASE("neighbour offsets") {
  CHECK(neighbor_offsets(3, Adjacency::kNearest).size() == 6);
  CHECK(neighbor_offsets(3, Adjacency::kStar).size() == 26);
  CHECK(neighbor_offsets(2, Adjacency::kStar).size() == 8);
}

TEST_CASE("cluster labels agree with breadth-first search") {
  Rng rng(8);
  for (int d : {2, 3}) {
    for (auto adj : {Adjacency::kNearest, Adjacency::kStar}) {
      for (double p : {0.2, 0.35, 0.6}) {
        for (int rep = 0; rep < 5; ++rep) {
          const auto xi = oracle::random_field(linf_box(Point::zero(d), 4), p, rng);
          for (std::uint8_t pol : {0, 1}) {
            const auto lab = label_clusters(xi, adj, pol);
            CHECK(oracle::same_partition(lab, oracle::bfs_components(xi, adj, pol), xi));
          }
        }
      }
    }
  }
}

TEST_CASE("crossing agrees with breadth-first search") {
  Rng rng(9);
  const Point c = Point::zero(3);
  for (auto adj : {Adjacency::kNearest, Adjacency::kStar}) {
    for (double p : {0.2, 0.3, 0.45}) {
      for (int rep = 0; rep < 20; ++rep) {
        const auto xi = oracle::random_field(linf_box(c, 6), p, rng);
        const auto q = CrossingQuery::annulus(c, 2, 6, adj);
        const bool want = oracle::bfs_crossing(
            xi, adj, [&](const Point& x) { return linf_norm(x) <= 2; },
            [&](const Point& x) { return linf_norm(x) > 6; });
        CHECK(crossing(xi, q) == want);
      }
    }
  }
}

TEST_CASE("overlapping regions throw") {
  Rng rng(1);
  const auto xi = oracle::random_field(linf_box(Point::zero(2), 3), 0.5, rng);
  CHECK_THROWS_AS(crossing(xi, CrossingQuery::annulus(Point::zero(2), 3, 2)), std::invalid_argument);
  CHECK(regions_overlap(Region::ball(Point{0, 0}, 2), Region::ball(Point{3, 0}, 1)));
  CHECK_FALSE(regions_overlap(Region::ball(Point{0, 0}, 1), Region::ball(Point{3, 0}, 1)));
}

TEST_CASE("E_M on constant fields") {
  const auto box = linf_box(Point::zero(3), 4);
  const std::vector<std::uint8_t> ones(box.cardinality(), 1), zeros(box.cardinality(), 0);
  const auto open = detect_EM(FieldSample::on_box(box, ones), 4);
  CHECK(open.holds);
  CHECK(open.large_clusters == 1);
  CHECK_FALSE(detect_EM(FieldSample::on_box(box, zeros), 4).holds);
  CHECK_THROWS_AS(detect_EM(FieldSample::on_box(box, ones), 5), std::invalid_argument);
  CHECK(special_cluster(FieldSample::on_box(box, ones), 4, Point::zero(3)).size() == box.cardinality());
}

TEST_CASE("E_M fails with two large clusters") {
  // Two full slabs separated by a closed plane.
  const auto box = linf_box(Point::zero(2), 4);
  std::vector<std::uint8_t> v;
  for (const auto& p : box.points()) v.push_back(p[0] == 0 ? 0 : 1);
  const auto r = detect_EM(FieldSample::on_box(box, v), 4);
  CHECK_FALSE(r.holds);
  CHECK(r.large_clusters == 2);
}

TEST_CASE("cluster diameter") {
  ClusterStats s;
  s.lo = Point{0, -2, 1};
  s.hi = Point{3, 4, 1};
  CHECK(s.diameter() == 6);
  CHECK(s.touches_all_faces(Point{0, 0, 0}, 1) == false);
}
