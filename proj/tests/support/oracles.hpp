#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond Point and FieldSample access.

#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <vector>

#include "voterperc/field.hpp"
#include "voterperc/lattice.hpp"
#include "voterperc/percolation.hpp"
#include "voterperc/rng.hpp"

namespace oracle {

using voterperc::Adjacency;
using voterperc::FieldSample;
using voterperc::Point;

inline std::vector<Point> offsets(int d, Adjacency adj) {
  std::vector<Point> out;
  if (adj == Adjacency::kNearest) {
    for (int i = 0; i < d; ++i) {
      for (int s : {-1, 1}) {
        Point p = Point::zero(d);
        p[i] = s;
        out.push_back(p);
      }
    }
    return out;
  }
  const int total = static_cast<int>(std::pow(3, d));
  for (int code = 0; code < total; ++code) {
    Point p = Point::zero(d);
    int c = code;
    bool zero = true;
    for (int i = 0; i < d; ++i) {
      p[i] = c % 3 - 1;
      c /= 3;
      zero = zero && p[i] == 0;
    }
    if (!zero) out.push_back(p);
  }
  return out;
}

// Component id per site of the given polarity, by breadth-first search.
inline std::map<Point, int> bfs_components(const FieldSample& xi, Adjacency adj,
                                           std::uint8_t polarity = 1) {
  std::map<Point, int> comp;
  const auto offs = offsets(xi.dim(), adj);
  int next = 0;
  for (const auto& s : xi.sites()) {
    if (xi.at(s) != polarity || comp.count(s)) continue;
    std::queue<Point> q;
    q.push(s);
    comp[s] = next;
    while (!q.empty()) {
      const Point p = q.front();
      q.pop();
      for (const auto& o : offs) {
        const Point y = p + o;
        if (xi.contains(y) && xi.at(y) == polarity && !comp.count(y)) {
          comp[y] = next;
          q.push(y);
        }
      }
    }
    ++next;
  }
  return comp;
}

// Whether the labeling induces exactly the partition `comp`.
inline bool same_partition(const voterperc::ClusterLabeling& lab,
                           const std::map<Point, int>& comp, const FieldSample& xi) {
  std::map<int, std::int32_t> fwd;
  std::map<std::int32_t, int> back;
  for (const auto& s : xi.sites()) {
    const auto l = lab.label_at(s);
    const auto it = comp.find(s);
    if ((l == voterperc::ClusterLabeling::kNoCluster) != (it == comp.end())) return false;
    if (it == comp.end()) continue;
    auto [f, fnew] = fwd.emplace(it->second, l);
    auto [b, bnew] = back.emplace(l, it->second);
    if (f->second != l || b->second != it->second) return false;
  }
  return fwd.size() == lab.cluster_count();
}

inline FieldSample random_field(const voterperc::BoxSpec& box, double p,
                                voterperc::Rng& rng) {
  std::vector<std::uint8_t> v(box.cardinality());
  for (auto& x : v) x = voterperc::uniform01(rng) < p ? 1 : 0;
  return FieldSample::on_box(box, v);
}

// Open path from a neighbour of `inner` to a neighbour of `outer`, by BFS.
template <class InnerPred, class OuterPred>
bool bfs_crossing(const FieldSample& xi, Adjacency adj, InnerPred inner, OuterPred outer) {
  const auto offs = offsets(xi.dim(), adj);
  auto next_to = [&](const Point& p, auto pred) {
    for (const auto& o : offs) {
      if (pred(p + o)) return true;
    }
    return false;
  };
  std::set<Point> seen;
  std::queue<Point> q;
  for (const auto& s : xi.sites()) {
    if (xi.at(s) == 1 && next_to(s, inner)) {
      seen.insert(s);
      q.push(s);
    }
  }
  while (!q.empty()) {
    const Point p = q.front();
    q.pop();
    if (next_to(p, outer)) return true;
    for (const auto& o : offs) {
      const Point y = p + o;
      if (xi.contains(y) && xi.at(y) == 1 && seen.insert(y).second) q.push(y);
    }
  }
  return false;
}

// Sum over u in B(0, r), v in B(delta, r), u != v of |u - v|_inf^(2-d).
inline double brute_pair_sum(int d, long r, const Point& delta) {
  const auto box = voterperc::linf_box(Point::zero(d), static_cast<int>(r)).points();
  double s = 0.0;
  for (const auto& u : box) {
    for (const auto& b : box) {
      const Point v = b + delta;
      if (u == v) continue;
      s += std::pow(static_cast<double>(voterperc::linf_dist(u, v)), 2 - d);
    }
  }
  return s;
}

}  // namespace oracle
