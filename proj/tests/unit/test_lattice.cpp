#include <doctest.h>

#include <algorithm>
#include <set>

#include "voterperc/field.hpp"
#include "voterperc/io.hpp"
#include "voterperc/lattice.hpp"

using namespace voterperc;

TEST_CASE("norms") {
  const Point p{3, -5, 2};
  CHECK(linf_norm(p) == 5);
  CHECK(l1_norm(p) == 10);
  CHECK(linf_dist(p, Point{0, 0, 0}) == 5);
  CHECK(l1_dist(Point{1, 1, 1}, Point{0, 0, 0}) == 3);
}

TEST_CASE("box enumeration is lexicographic and complete") {
  for (int d = 1; d <= 4; ++d) {
    for (int r = 0; r <= 3; ++r) {
      const auto box = linf_box(Point::zero(d), r);
      const auto pts = box.points();
      CHECK(pts.size() == box.cardinality());
      CHECK(pts.size() == linf_ball_cardinality(static_cast<std::uint64_t>(r), d));
      CHECK(std::is_sorted(pts.begin(), pts.end()));
      CHECK(std::adjacent_find(pts.begin(), pts.end()) == pts.end());
      for (const auto& p : pts) CHECK(box.contains(p));
    }
  }
  CHECK(linf_ball_cardinality(4, 3) == 729);
}

TEST_CASE("l1 balls") {
  CHECK(l1_ball_cardinality(3, 1) == 7);
  CHECK(l1_ball_cardinality(3, 2) == 25);
  const auto b = l1_ball(Point{1, 1, 1}, 2);
  CHECK(b.size() == 25);
  for (const auto& p : b) CHECK(l1_dist(p, Point{1, 1, 1}) <= 2);
  CHECK_THROWS_AS(l1_ball(Point::zero(3), 0), std::invalid_argument);
}

TEST_CASE("spheres and keys") {
  CHECK(on_linf_sphere(Point{2, -1, 0}, Point::zero(3), 2));
  CHECK_FALSE(on_linf_sphere(Point{1, -1, 0}, Point::zero(3), 2));
  std::set<std::uint64_t> keys;
  for (const auto& p : linf_box(Point::zero(3), 5).points()) keys.insert(pack_key(p));
  CHECK(keys.size() == 1331);
}

TEST_CASE("well-ordering is lexicographic") {
  CHECK(Point{0, 5} < Point{1, -5});
  CHECK(Point{1, -5} < Point{1, 0});
  CHECK(Point::unit(3, 1, -1) == Point{0, -1, 0});
}

TEST_CASE("field sample access and shift") {
  const auto box = linf_box(Point::zero(2), 1);
  std::vector<std::uint8_t> v(9);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i % 2;
  const auto xi = FieldSample::on_box(box, v);
  CHECK(xi.size() == 9);
  CHECK(xi.at(Point{-1, -1}) == 0);
  CHECK(xi.at(Point{-1, 0}) == 1);
  CHECK_THROWS_AS(xi.at(Point{2, 0}), std::out_of_range);
  CHECK(xi.value_or_undefined(Point{2, 0}) == FieldSample::kUndefined);
  const auto moved = shift_config(xi, Point{3, 0});
  for (const auto& p : box.points()) CHECK(moved.at(p + Point{3, 0}) == xi.at(p));
}

TEST_CASE("sparse field keeps undefined sites out") {
  const std::vector<Point> sites{Point{0, 0}, Point{2, 1}};
  const std::vector<std::uint8_t> vals{1, 0};
  const auto xi = FieldSample::on_sites(sites, vals);
  CHECK(xi.size() == 2);
  CHECK_FALSE(xi.contains(Point{1, 0}));
  CHECK(xi.sites() == sites);
}

TEST_CASE("field JSON round trip") {
  Provenance p;
  p.sampler = "bernoulli";
  p.d = 3;
  p.alpha = 0.25;
  p.seed = 99;
  const auto box = linf_box(Point::zero(3), 2);
  std::vector<std::uint8_t> v(box.cardinality());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i * 7 % 5) < 2;
  const auto xi = FieldSample::on_box(box, v, p);
  const auto back = field_from_json(field_to_json(xi, {{"k", "v"}}));
  CHECK(back == xi);
  CHECK(back.provenance().sampler == "bernoulli");
  CHECK(back.provenance().seed == 99);
  CHECK(field_to_json(back, {{"k", "v"}}) == field_to_json(xi, {{"k", "v"}}));
}

TEST_CASE("run-length coding") {
  const std::vector<std::uint8_t> v{1, 1, 0, 0, 0, 1, 255};
  const auto runs = run_length_encode(v);
  CHECK(runs.size() == 4);
  CHECK(run_length_decode(runs) == v);
}

TEST_CASE("csv formatting") {
  CsvTable t;
  t.comments = {"hello"};
  t.header = {"a", "b"};
  t.add_row({"1", "x,y"});
  CHECK(t.to_string() == "# hello\na,b\n1,\"x,y\"\n");
  CHECK_THROWS(t.add_row({"1"}));
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-7) == "1e-07");
}
