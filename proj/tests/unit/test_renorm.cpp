#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "voterperc/renorm.hpp"

using namespace voterperc;

namespace {

Point e1(long v) { return Point{static_cast<int>(v), 0, 0}; }

// Depth-2 embedding in which leaf 1 sees three close leaves at k = 2.
ProperEmbedding crowded_embedding() {
  const long L = 2;
  ProperEmbedding T;
  T.N = 2;
  T.L = L;
  T.d = 3;
  T.nodes = {e1(0), e1(36 * L), e1(72 * L), e1(30 * L), e1(48 * L), e1(66 * L), e1(60 * L)};
  return T;
}

}  // namespace

TEST_CASE("scale ladder") {
  const ScaleLadder s{2, 3};
  CHECK(s.scale(0) == 2);
  CHECK(s.scale(2) == 72);
  CHECK(s.on_lattice(Point{72, -144, 0}, 2));
  CHECK_FALSE(s.on_lattice(Point{12, 0, 0}, 2));
}

TEST_CASE("tree index") {
  const auto m = TreeIndex::parse("12");
  CHECK(m.heap() == 4);
  CHECK(m.depth() == 2);
  CHECK(m.to_string() == "12");
  CHECK(m.parent() == TreeIndex::parse("1"));
  CHECK(TreeIndex::root().child(2).heap() == 2);
  CHECK(tree_size(3) == 15);
  CHECK(first_leaf_heap(3) == 7);
  CHECK_THROWS(TreeIndex::parse("13"));
}

TEST_CASE("family sizes") {
  CHECK(choices_per_node(3, EmbeddingFamily::kLatticeAligned) == 2548);
  CHECK(choices_per_node(3, EmbeddingFamily::kFull) == 866ull * 3458ull);
  CHECK(embedding_count(2, 3, EmbeddingFamily::kLatticeAligned) ==
        doctest::Approx(std::pow(2548.0, 3)));
  CHECK(child_offsets(ScaleLadder{2, 1}, 3, 0, 1, EmbeddingFamily::kLatticeAligned).size() == 26);
  CHECK(child_offsets(ScaleLadder{2, 1}, 3, 0, 2, EmbeddingFamily::kLatticeAligned).size() == 98);
}

TEST_CASE("every aligned depth-one embedding is proper with disjoint leaves") {
  std::uint64_t bad = 0, overlapping = 0;
  const auto n = enumerate_embeddings(1, 3, 2, [&](const ProperEmbedding& T) {
    bad += !validate_embedding(T);
    overlapping += !leaf_boxes_disjoint(T);
  });
  CHECK(n == 2548);
  CHECK(bad == 0);
  CHECK(overlapping == 0);
  CHECK_THROWS_AS(enumerate_embeddings(2, 3, 2, [](const ProperEmbedding&) {}), std::length_error);
}

TEST_CASE("random embeddings are proper and satisfy the pair-sum bound") {
  Rng rng(21);
  PairSumEvaluator eval(3, 2);
  for (int N : {2, 3}) {
    for (auto fam : {EmbeddingFamily::kLatticeAligned, EmbeddingFamily::kFull}) {
      for (int i = 0; i < 30; ++i) {
        const auto T = random_embedding(N, 3, 2, rng, fam);
        CHECK(embedding_violation(T) == "");
        CHECK(leaf_boxes_disjoint(T));
        const auto ps = check_pair_sum(T, eval);
        CHECK(ps.pass);
        CHECK(ps.sum > 0.0);
      }
    }
  }
}

TEST_CASE("violations are detected") {
  auto T = crowded_embedding();
  T.nodes[3] = e1(36 * 2 + 1);
  CHECK_FALSE(validate_embedding(T));
  CHECK(embedding_violation(T) != "");
}

TEST_CASE("close-leaf count can exceed 2^(k-1)") {
  const auto T = crowded_embedding();
  REQUIRE(embedding_violation(T) == "");
  const auto r = check_sparsity(T, 1, 2);
  CHECK(r.count == 3);
  CHECK(r.bound == 2);
  CHECK_FALSE(r.pass);
  CHECK(check_sparsity(T, 1, 1).pass);
}

TEST_CASE("embeddings built from crossing paths") {
  Rng rng(22);
  for (int N : {1, 2}) {
    for (int i = 0; i < 10; ++i) {
      const auto gamma = random_crossing_path(N, 2, 3, rng);
      CHECK(is_star_path(gamma));
      const auto T = embed_from_path(gamma, N, 2);
      CHECK(validate_embedding(T));
      CHECK(path_crosses_leaves(gamma, T));
    }
  }
  const Path bad{Point{0, 0, 0}, Point{2, 0, 0}};
  CHECK_THROWS_AS(embed_from_path(bad, 1, 2), std::invalid_argument);
}

TEST_CASE("box pair sums agree with brute force") {
  PairSumEvaluator eval(3, 1);
  for (const Point& delta : {Point{5, 0, 0}, Point{3, 1, 0}, Point{0, 4, -4}}) {
    CHECK(eval.box_pair(delta) == doctest::Approx(oracle::brute_pair_sum(3, 2, delta)));
  }
  CHECK(eval.box_self() == doctest::Approx(0.5 * oracle::brute_pair_sum(3, 2, Point{0, 0, 0})));
}

TEST_CASE("pair-sum constants") {
  const auto c = pair_sum_constants(3, 2);
  CHECK(c.C == doctest::Approx(508.9).epsilon(1e-3));
  CHECK(c.C2 == doctest::Approx(873.4).epsilon(1e-3));
  CHECK(c.Cprime == doctest::Approx(std::pow(9.0, 3) * c.C2));
}

TEST_CASE("neighbourhood counts") {
  const auto T = crowded_embedding();
  const auto nc = neighborhood_count(T, T.leaf(0), 1);
  CHECK(nc.count > 0);
  CHECK(nc.bound == 729);
  CHECK_THROWS_AS(neighborhood_count(T, e1(1000), 1), std::invalid_argument);
}

TEST_CASE("embedding JSON round trip") {
  const auto T = crowded_embedding();
  const auto back = embedding_from_json(embedding_to_json(T));
  CHECK(back.nodes == T.nodes);
  CHECK(back.N == 2);
  CHECK(back.L == 2);
}
