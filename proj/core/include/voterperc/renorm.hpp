#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "voterperc/lattice.hpp"
#include "voterperc/rng.hpp"

namespace voterperc {

// L_k = 6^k L and the lattices L_k Z^d.
struct ScaleLadder {
  long L = 1;
  int N = 0;

  long scale(int k) const;
  bool on_lattice(const Point& p, int k) const;
};

// A vertex of the binary tree T_N, stored in heap order: the root is 0 and
// the children m1, m2 of node i are 2i+1 and 2i+2.
class TreeIndex {
 public:
  TreeIndex() = default;
  static TreeIndex root() { return TreeIndex(); }
  static TreeIndex from_heap(std::size_t heap) { return TreeIndex(heap); }
  // From a string over {1,2}; the empty string is the root.
  static TreeIndex parse(const std::string& s);

  std::size_t heap() const { return heap_; }
  int depth() const;
  TreeIndex child(int which) const;  // which is 1 or 2
  TreeIndex parent() const;
  std::string to_string() const;

  friend bool operator==(TreeIndex, TreeIndex) = default;

 private:
  explicit TreeIndex(std::size_t heap) : heap_(heap) {}
  std::size_t heap_ = 0;
};

std::size_t tree_size(int N);        // 2^(N+1) - 1
std::size_t first_leaf_heap(int N);  // 2^N - 1

struct ProperEmbedding {
  int N = 0;
  long L = 1;
  int d = 3;
  std::vector<Point> nodes;  // heap order

  const Point& at(TreeIndex m) const { return nodes.at(m.heap()); }
  std::size_t leaf_count() const { return std::size_t{1} << N; }
  // Leaf j in 0 .. 2^N - 1, left to right.
  const Point& leaf(std::size_t j) const { return nodes.at(first_leaf_heap(N) + j); }
  std::vector<Point> leaves() const;
};

// Which child offsets an enumeration or sampler draws from.
//  kLatticeAligned: the offset of a child of a depth-k node is a multiple of
//    the parent's scale L_{N-k}, so |offset| in {1, 2} parent units. Gives
//    (3^d - 1)(5^d - 3^d) choices per node.
//  kFull: every offset allowed by the definition, i.e. children anywhere on
//    L_{N-k-1} Z^d at l-infinity distance L_{N-k} or 2 L_{N-k}. Gives
//    (13^d - 11^d)(25^d - 23^d) choices per node.
enum class EmbeddingFamily { kLatticeAligned, kFull };
std::string to_string(EmbeddingFamily f);

// Child offsets for a node at depth k (which = 1 or 2), in lexicographic order.
std::vector<Point> child_offsets(const ScaleLadder& ladder, int d, int k,
                                 int which, EmbeddingFamily family);
// Choices per internal node.
std::uint64_t choices_per_node(int d, EmbeddingFamily family);
// Exact |family| = choices^(2^N - 1) as a long double (may be huge).
long double embedding_count(int N, int d, EmbeddingFamily family);

inline constexpr std::uint64_t kEnumerationGuard = 10'000'000;

// Visits every embedding of the family (odometer over nodes in heap order)
// and returns how many were visited. Throws std::length_error when the count
// exceeds `guard`.
std::uint64_t enumerate_embeddings(
    int N, int d, long L,
    const std::function<void(const ProperEmbedding&)>& visit,
    EmbeddingFamily family = EmbeddingFamily::kLatticeAligned,
    std::uint64_t guard = kEnumerationGuard);

// Properties (1)-(3) of the definition, with |.| the l-infinity norm.
bool validate_embedding(const ProperEmbedding& T);
// Empty when valid, otherwise the first violated property.
std::string embedding_violation(const ProperEmbedding& T);

// Independent uniform child choices from the family at every node.
ProperEmbedding random_embedding(int N, int d, long L, Rng& rng,
                                 EmbeddingFamily family =
                                     EmbeddingFamily::kLatticeAligned);

// l-infinity distance between the sets B(a, r) and B(b, r).
long box_distance(const Point& a, const Point& b, long r);

struct SparsityResult {
  std::size_t count = 0;  // leaves m != m0 with close boxes
  std::uint64_t bound = 0;  // 2^(k-1)
  bool pass = true;
};

// |{m leaf, m != m0 : dist(B(T(m0), 2L), B(T(m), 2L)) <= 6^k L / 2}|
// against 2^(k-1). Requires k >= 1 and a valid T.
SparsityResult check_sparsity(const ProperEmbedding& T, std::size_t leaf_m0,
                              int k);

struct SparsityAuditRow {
  std::size_t leaf = 0;
  int k = 0;
  SparsityResult result;
};
// All leaves and 1 <= k <= k_max, without re-validating T.
std::vector<SparsityAuditRow> sparsity_audit(const ProperEmbedding& T, int k_max);

// Leaf boxes B(T(m), 2L) pairwise disjoint.
bool leaf_boxes_disjoint(const ProperEmbedding& T);

// A *-connected lattice path.
using Path = std::vector<Point>;
bool is_star_path(const Path& gamma);

// The path meets S(T(m), L - 1) and S(T(m), 2L) for every leaf m.
bool path_crosses_leaves(const Path& gamma, const ProperEmbedding& T);

// Builds an embedding whose leaf boxes are all crossed by gamma. gamma must
// be *-connected and meet S(L_N - 1) and S(2 L_N) (std::invalid_argument
// otherwise). The result is re-validated; std::logic_error if the check
// fails.
ProperEmbedding embed_from_path(const Path& gamma, int N, long L);

// Random *-connected path from S(L_N - 1) to S(2 L_N), drifting outward.
Path random_crossing_path(int N, long L, int d, Rng& rng, double outward_bias = 0.5);

struct NeighborhoodCount {
  std::uint64_t count = 0;
  std::uint64_t bound = 0;  // (4L+1)^d 2^(k-1)
  bool pass = true;
};

// |{v in A : v != u, |u - v| <= 6^k L / 2}| for A the union of leaf boxes
// B(T(m), 2L). Throws std::invalid_argument for u outside A or k < 1.
NeighborhoodCount neighborhood_count(const ProperEmbedding& T, const Point& u,
                                     int k);

// Constants of the pair-sum bound for given d >= 3, L:
//   C   = sum over w in B(0, 3L) \ {0} of |w|^(2-d)
//   C'' = C + sum_{k>=1} (4L+1)^d 2^k (6^k L / 2)^(2-d)
//   C'  = (4L+1)^d C''
struct PairSumConstants {
  double C = 0.0;
  double C2 = 0.0;
  double Cprime = 0.0;
};
PairSumConstants pair_sum_constants(int d, long L);

// Exact sum over unordered pairs u != v of A of |u - v|^(2-d), computed
// box-pair by box-pair from the autocorrelation of B(0, 2L). The cache is
// keyed by the canonical centre difference and may be shared across calls
// with equal (d, L).
class PairSumEvaluator {
 public:
  PairSumEvaluator(int d, long L);
  double pair_sum(const ProperEmbedding& T);
  // Sum over u in B(0,2L), v in B(delta,2L), u != v, of |u - v|^(2-d).
  double box_pair(const Point& delta);
  double box_self() const { return self_; }
  const PairSumConstants& constants() const { return constants_; }

 private:
  double inverse_power(long n);  // n^(2-d), 0 for n = 0

  struct Weighted {
    Point z;
    double count;
  };
  int d_;
  long L_;
  double self_ = 0.0;
  PairSumConstants constants_;
  std::vector<Weighted> kernel_;  // autocorrelation of B(0, 2L)
  std::vector<double> powers_;
  std::map<Point, double> cache_;
};

struct PairSumResult {
  double sum = 0.0;
  double bound = 0.0;  // C' 2^N
  bool pass = true;
};
PairSumResult check_pair_sum(const ProperEmbedding& T, PairSumEvaluator& eval);

// Embedding dump: {"schema_version", "N", "d", "L", "nodes": {"": [..], "1": ..}}.
std::string embedding_to_json(const ProperEmbedding& T);
ProperEmbedding embedding_from_json(const std::string& text);

}  // namespace voterperc
