#include "voterperc/percolation.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>

#include "voterperc/io.hpp"

namespace voterperc {

UnionFind::UnionFind(std::size_t n) { reset(n); }

void UnionFind::reset(std::size_t n) {
  parent_.resize(n);
  std::iota(parent_.begin(), parent_.end(), 0u);
  size_.assign(n, 1);
}

std::uint32_t UnionFind::find(std::uint32_t x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

std::uint32_t UnionFind::unite(std::uint32_t a, std::uint32_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return a;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
  return a;
}

std::string to_string(Adjacency a) {
  return a == Adjacency::kNearest ? "nearest" : "star";
}

std::vector<Point> neighbor_offsets(int d, Adjacency a) {
  std::vector<Point> out;
  if (a == Adjacency::kNearest) {
    for (int i = 0; i < d; ++i) {
      out.push_back(Point::unit(d, i, -1));
      out.push_back(Point::unit(d, i, 1));
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  for (const auto& p : linf_box(Point::zero(d), 1).points()) {
    if (p != Point::zero(d)) out.push_back(p);
  }
  return out;
}

long ClusterStats::diameter() const {
  long diam = 0;
  for (int i = 0; i < lo.dim(); ++i) diam = std::max<long>(diam, hi[i] - lo[i]);
  return diam;
}

bool ClusterStats::touches_all_faces(const Point& c, long r) const {
  for (int i = 0; i < c.dim(); ++i) {
    if (lo[i] > c[i] - r || hi[i] < c[i] + r) return false;
  }
  return true;
}

long ClusterLabeling::index_of(const Point& p) const {
  if (p.dim() != origin_.dim()) return -1;
  long idx = 0;
  for (int i = 0; i < origin_.dim(); ++i) {
    const int off = p[i] - origin_[i];
    if (off < 0 || off >= extent_[i]) return -1;
    idx = idx * extent_[i] + off;
  }
  return idx;
}

std::int32_t ClusterLabeling::label_at(const Point& p) const {
  const long idx = index_of(p);
  return idx < 0 ? kNoCluster : labels_[static_cast<std::size_t>(idx)];
}

std::vector<Point> ClusterLabeling::cluster_sites(std::int32_t id) const {
  std::vector<Point> out;
  const int d = origin_.dim();
  for (std::size_t idx = 0; idx < labels_.size(); ++idx) {
    if (labels_[idx] != id) continue;
    Point p = origin_;
    std::size_t rest = idx;
    for (int i = d - 1; i >= 0; --i) {
      p[i] = origin_[i] + static_cast<int>(rest % static_cast<std::size_t>(extent_[i]));
      rest /= static_cast<std::size_t>(extent_[i]);
    }
    out.push_back(p);
  }
  return out;
}

std::size_t ClusterLabeling::max_cluster_size() const {
  std::size_t m = 0;
  for (const auto& c : clusters_) m = std::max(m, c.size);
  return m;
}

ClusterLabeling label_clusters(const FieldSample& xi, Adjacency adj,
                               std::uint8_t polarity,
                               const std::optional<BoxSpec>& restrict_to) {
  ClusterLabeling out;
  out.adjacency_ = adj;
  out.polarity_ = polarity;
  const int d = xi.dim();
  if (d == 0) return out;
  Point lo = xi.origin();
  Point hi = xi.origin() + xi.extent() - Point(std::vector<int>(d, 1));
  if (restrict_to) {
    if (restrict_to->dim() != d) throw std::invalid_argument("dimension mismatch");
    for (int i = 0; i < d; ++i) {
      lo[i] = std::max(lo[i], restrict_to->center[i] - restrict_to->radius);
      hi[i] = std::min(hi[i], restrict_to->center[i] + restrict_to->radius);
    }
  }
  Point extent = Point::zero(d);
  std::size_t volume = 1;
  for (int i = 0; i < d; ++i) {
    extent[i] = std::max(0, hi[i] - lo[i] + 1);
    volume *= static_cast<std::size_t>(extent[i]);
  }
  out.origin_ = lo;
  out.extent_ = extent;
  out.labels_.assign(volume, ClusterLabeling::kNoCluster);
  if (volume == 0) return out;

  // Active flags over the labelled box, read straight from storage.
  std::vector<std::uint8_t> active(volume, 0);
  std::vector<std::array<int, kMaxDim>> coords(volume);
  {
    std::array<int, kMaxDim> c{};
    for (std::size_t idx = 0; idx < volume; ++idx) {
      std::size_t rest = idx;
      for (int i = d - 1; i >= 0; --i) {
        c[i] = static_cast<int>(rest % static_cast<std::size_t>(extent[i]));
        rest /= static_cast<std::size_t>(extent[i]);
      }
      coords[idx] = c;
      Point p = lo;
      for (int i = 0; i < d; ++i) p[i] += c[i];
      active[idx] = xi.value_or_undefined(p) == polarity ? 1 : 0;
    }
  }
  std::array<long, kMaxDim> stride{};
  stride[static_cast<std::size_t>(d - 1)] = 1;
  for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * extent[i + 1];

  // Only offsets that precede the origin lexicographically: each edge once.
  std::vector<Point> back;
  for (const auto& o : neighbor_offsets(d, adj)) {
    if (o < Point::zero(d)) back.push_back(o);
  }
  UnionFind uf(volume);
  for (std::size_t idx = 0; idx < volume; ++idx) {
    if (!active[idx]) continue;
    const auto& c = coords[idx];
    for (const auto& o : back) {
      long nidx = 0;
      bool inside = true;
      for (int i = 0; i < d; ++i) {
        const int v = c[i] + o[i];
        if (v < 0 || v >= extent[i]) {
          inside = false;
          break;
        }
        nidx += static_cast<long>(v) * stride[i];
      }
      if (inside && active[static_cast<std::size_t>(nidx)]) {
        uf.unite(static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(nidx));
      }
    }
  }
  std::vector<std::int32_t> id_of_root(volume, ClusterLabeling::kNoCluster);
  for (std::size_t idx = 0; idx < volume; ++idx) {
    if (!active[idx]) continue;
    const auto root = uf.find(static_cast<std::uint32_t>(idx));
    auto& id = id_of_root[root];
    Point p = lo;
    for (int i = 0; i < d; ++i) p[i] += coords[idx][i];
    if (id == ClusterLabeling::kNoCluster) {
      id = static_cast<std::int32_t>(out.clusters_.size());
      out.clusters_.push_back({0, p, p});
    }
    out.labels_[idx] = id;
    auto& st = out.clusters_[static_cast<std::size_t>(id)];
    ++st.size;
    for (int i = 0; i < d; ++i) {
      st.lo[i] = std::min(st.lo[i], p[i]);
      st.hi[i] = std::max(st.hi[i], p[i]);
    }
  }
  return out;
}

bool Region::contains(const Point& p) const {
  const bool in_ball = linf_dist(p, center) <= radius;
  return kind == Kind::kBall ? in_ball : !in_ball;
}

std::string Region::describe() const {
  return "B(" + center.to_string() + "," +
         std::to_string(radius) + (kind == Kind::kBall ? ")" : ")^c");
}

bool regions_overlap(const Region& a, const Region& b) {
  using K = Region::Kind;
  if (a.kind == K::kComplement && b.kind == K::kComplement) return true;
  if (a.kind == K::kBall && b.kind == K::kBall) {
    return linf_dist(a.center, b.center) <= a.radius + b.radius;
  }
  const Region& ball = a.kind == K::kBall ? a : b;
  const Region& comp = a.kind == K::kBall ? b : a;
  return linf_dist(ball.center, comp.center) + ball.radius > comp.radius;
}

CrossingQuery CrossingQuery::annulus(const Point& c, long inner_r, long outer_r,
                                     Adjacency adj, std::uint8_t polarity) {
  return {Region::ball(c, inner_r), Region::complement(c, outer_r), adj, polarity};
}

bool crossing(const FieldSample& xi, const CrossingQuery& q) {
  if (regions_overlap(q.inner, q.outer)) {
    throw std::invalid_argument("crossing regions overlap: " + q.inner.describe() +
                                " and " + q.outer.describe());
  }
  const ClusterLabeling lab = label_clusters(xi, q.adjacency, q.polarity);
  if (lab.cluster_count() == 0) return false;
  const auto offsets = neighbor_offsets(xi.dim(), q.adjacency);
  auto adjacent_to = [&](const Point& p, const Region& r) {
    for (const auto& o : offsets) {
      if (r.contains(p + o)) return true;
    }
    return false;
  };
  std::vector<std::uint8_t> reach(lab.cluster_count(), 0);
  for (const auto& p : xi.sites()) {
    const auto id = lab.label_at(p);
    if (id == ClusterLabeling::kNoCluster) continue;
    auto& r = reach[static_cast<std::size_t>(id)];
    if (!(r & 1) && adjacent_to(p, q.inner)) r |= 1;
    if (!(r & 2) && adjacent_to(p, q.outer)) r |= 2;
    if (r == 3) return true;
  }
  return false;
}

EMResult detect_EM(const FieldSample& xi, long M, const Point& center_in) {
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  const int d = xi.dim();
  const Point center = center_in.dim() == 0 ? Point::zero(d) : center_in;
  const BoxSpec box = linf_box(center, static_cast<int>(M));
  for (const auto& p : box.points()) {
    if (!xi.contains(p)) {
      throw std::invalid_argument("undersized window: sample does not cover " +
                                  p.to_string() + " of B(" + center.to_string() +
                                  "," + std::to_string(M) + ")");
    }
  }
  EMResult res;
  res.labeling = label_clusters(xi, Adjacency::kNearest, 1, box);
  const auto& cl = res.labeling.clusters();
  std::int32_t candidate = ClusterLabeling::kNoCluster;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    if (cl[i].diameter() >= M) {
      ++res.large_clusters;
      candidate = static_cast<std::int32_t>(i);
    }
  }
  if (res.large_clusters == 1 &&
      cl[static_cast<std::size_t>(candidate)].touches_all_faces(center, M)) {
    res.holds = true;
    res.special = candidate;
  }
  return res;
}

FieldSample coarse_grain(const FieldSample& xi, long M, int radius) {
  const int d = xi.dim();
  const BoxSpec window = linf_box(Point::zero(d), radius);
  std::vector<std::uint8_t> values;
  for (const auto& x : window.points()) {
    const Point c = x.scaled(static_cast<int>(M));
    for (const auto& corner : {c - Point(std::vector<int>(d, static_cast<int>(M))),
                               c + Point(std::vector<int>(d, static_cast<int>(M)))}) {
      if (!xi.contains(corner)) {
        throw std::invalid_argument("insufficient coverage for renormalised site " +
                                    x.to_string());
      }
    }
    values.push_back(detect_EM(xi, M, c).holds ? 1 : 0);
  }
  Provenance p = xi.provenance();
  p.sampler = "coarse_grain(" + p.sampler + ")";
  p.extra["M"] = std::to_string(M);
  return FieldSample::on_box(window, std::move(values), std::move(p));
}

std::vector<Point> special_cluster(const FieldSample& xi, long M,
                                   const Point& center) {
  const EMResult r = detect_EM(xi, M, center);
  if (!r.holds) return {};
  return r.labeling.cluster_sites(r.special);
}

ClusterStatsRow cluster_stats_row(std::string field_id,
                                  const ClusterLabeling& labeling) {
  ClusterStatsRow row;
  row.field_id = std::move(field_id);
  row.adjacency = labeling.adjacency();
  row.n_clusters = labeling.cluster_count();
  row.max_size = labeling.max_cluster_size();
  const Point& lo = labeling.origin();
  const Point& ext = labeling.extent();
  for (const auto& c : labeling.clusters()) {
    bool all = true;
    for (int i = 0; i < lo.dim() && all; ++i) {
      all = c.lo[i] == lo[i] && c.hi[i] == lo[i] + ext[i] - 1;
    }
    if (all) {
      row.spans_faces = true;
      break;
    }
  }
  return row;
}

std::string cluster_stats_csv(std::span<const ClusterStatsRow> rows) {
  CsvTable t;
  t.header = {"field_id", "adjacency", "n_clusters", "max_size", "spans_faces"};
  for (const auto& r : rows) {
    t.add_row({r.field_id, to_string(r.adjacency), std::to_string(r.n_clusters),
               std::to_string(r.max_size), r.spans_faces ? "1" : "0"});
  }
  return t.to_string();
}

}  // namespace voterperc
