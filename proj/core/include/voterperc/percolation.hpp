#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voterperc/field.hpp"
#include "voterperc/lattice.hpp"

namespace voterperc {

// Union by size with path halving.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n = 0);
  void reset(std::size_t n);
  std::uint32_t find(std::uint32_t x);
  // Returns the new root, or the common root if already joined.
  std::uint32_t unite(std::uint32_t a, std::uint32_t b);
  bool same(std::uint32_t a, std::uint32_t b) { return find(a) == find(b); }
  std::uint32_t size_of(std::uint32_t x) { return size_[find(x)]; }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

enum class Adjacency {
  kNearest,  // |x - y|_1 = 1
  kStar,     // |x - y| = 1 in l-infinity
};
std::string to_string(Adjacency a);

// Offsets y - x of the neighbors of x.
std::vector<Point> neighbor_offsets(int d, Adjacency a);

struct ClusterStats {
  std::size_t size = 0;
  Point lo;  // bounding box corners
  Point hi;

  // l-infinity diameter of the cluster.
  long diameter() const;
  // Contains a site on every face {x_i = c_i +- r} of B(c, r).
  bool touches_all_faces(const Point& c, long r) const;
};

// Connected components of the sites with value `polarity`. Clusters are
// numbered 0, 1, ... in order of their first site in lexicographic order.
class ClusterLabeling {
 public:
  static constexpr std::int32_t kNoCluster = -1;

  Adjacency adjacency() const { return adjacency_; }
  std::uint8_t polarity() const { return polarity_; }
  // The box that was labelled.
  const Point& origin() const { return origin_; }
  const Point& extent() const { return extent_; }

  std::size_t cluster_count() const { return clusters_.size(); }
  const std::vector<ClusterStats>& clusters() const { return clusters_; }
  // kNoCluster for sites that are outside the box or not of the polarity.
  std::int32_t label_at(const Point& p) const;
  std::vector<Point> cluster_sites(std::int32_t id) const;
  std::size_t max_cluster_size() const;

  friend ClusterLabeling label_clusters(const FieldSample& xi, Adjacency adj,
                                        std::uint8_t polarity,
                                        const std::optional<BoxSpec>& restrict_to);

 private:
  long index_of(const Point& p) const;

  Adjacency adjacency_ = Adjacency::kNearest;
  std::uint8_t polarity_ = 1;
  Point origin_;
  Point extent_;
  std::vector<std::int32_t> labels_;
  std::vector<ClusterStats> clusters_;
};

// Labels the sites of xi (optionally only those inside restrict_to).
ClusterLabeling label_clusters(const FieldSample& xi, Adjacency adj,
                               std::uint8_t polarity = 1,
                               const std::optional<BoxSpec>& restrict_to = {});

// An l-infinity ball B(center, radius) or its complement.
struct Region {
  enum class Kind { kBall, kComplement };
  Kind kind = Kind::kBall;
  Point center;
  long radius = 0;

  static Region ball(const Point& c, long r) { return {Kind::kBall, c, r}; }
  static Region complement(const Point& c, long r) {
    return {Kind::kComplement, c, r};
  }
  bool contains(const Point& p) const;
  std::string describe() const;
};

bool regions_overlap(const Region& a, const Region& b);

struct CrossingQuery {
  Region inner;
  Region outer;
  Adjacency adjacency = Adjacency::kNearest;
  std::uint8_t polarity = 1;

  // B(c, inner_r) <-> B(c, outer_r)^c.
  static CrossingQuery annulus(const Point& c, long inner_r, long outer_r,
                               Adjacency adj = Adjacency::kNearest,
                               std::uint8_t polarity = 1);
};

// True iff some path of sites of xi with the queried value, consecutive sites
// adjacent, starts at a neighbor of the inner region and ends at a neighbor
// of the outer region. Only sites of the sample are used. Throws
// std::invalid_argument when the regions overlap.
bool crossing(const FieldSample& xi, const CrossingQuery& q);

struct EMResult {
  bool holds = false;
  std::int32_t special = ClusterLabeling::kNoCluster;
  std::size_t large_clusters = 0;  // clusters of diameter >= M
  ClusterLabeling labeling;
};

// The event E_M on B(center, M): exactly one open nearest-neighbor cluster of
// xi restricted to the box has l-infinity diameter >= M, and it meets all 2d
// faces. Throws std::invalid_argument when xi does not cover the box.
EMResult detect_EM(const FieldSample& xi, long M,
                   const Point& center = Point());

// xi~(x) = 1 iff E_M holds on B(M x, M), for x in B(0, radius) of the
// renormalised lattice.
FieldSample coarse_grain(const FieldSample& xi, long M, int radius);

// Sites of the special cluster of B(center, M), empty when E_M fails.
std::vector<Point> special_cluster(const FieldSample& xi, long M,
                                   const Point& center);

struct ClusterStatsRow {
  std::string field_id;
  Adjacency adjacency = Adjacency::kNearest;
  std::size_t n_clusters = 0;
  std::size_t max_size = 0;
  bool spans_faces = false;  // some cluster meets all faces of the box
};

ClusterStatsRow cluster_stats_row(std::string field_id,
                                  const ClusterLabeling& labeling);
std::string cluster_stats_csv(std::span<const ClusterStatsRow> rows);

}  // namespace voterperc
