#include "voterperc/renorm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "voterperc/walks.hpp"

namespace voterperc {

namespace {

long pow6(int k) {
  long v = 1;
  for (int i = 0; i < k; ++i) {
    if (v > (1L << 40)) throw std::overflow_error("scale overflow");
    v *= 6;
  }
  return v;
}

}  // namespace

long ScaleLadder::scale(int k) const {
  if (k < 0) throw std::invalid_argument("negative scale index");
  return pow6(k) * L;
}

bool ScaleLadder::on_lattice(const Point& p, int k) const {
  const long s = scale(k);
  for (int i = 0; i < p.dim(); ++i) {
    if (p[i] % s != 0) return false;
  }
  return true;
}

TreeIndex TreeIndex::parse(const std::string& s) {
  std::size_t h = 0;
  for (char c : s) {
    if (c == '1') {
      h = 2 * h + 1;
    } else if (c == '2') {
      h = 2 * h + 2;
    } else {
      throw std::invalid_argument("tree index must be a string over {1,2}: " + s);
    }
  }
  return TreeIndex(h);
}

int TreeIndex::depth() const {
  int k = 0;
  std::size_t h = heap_ + 1;
  while (h > 1) {
    h >>= 1;
    ++k;
  }
  return k;
}

TreeIndex TreeIndex::child(int which) const {
  if (which != 1 && which != 2) throw std::invalid_argument("child is 1 or 2");
  return TreeIndex(2 * heap_ + static_cast<std::size_t>(which));
}

TreeIndex TreeIndex::parent() const {
  if (heap_ == 0) throw std::invalid_argument("root has no parent");
  return TreeIndex((heap_ - 1) / 2);
}

std::string TreeIndex::to_string() const {
  std::string s;
  std::size_t h = heap_;
  while (h > 0) {
    s += (h % 2 == 1) ? '1' : '2';
    h = (h - 1) / 2;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::size_t tree_size(int N) { return (std::size_t{1} << (N + 1)) - 1; }
std::size_t first_leaf_heap(int N) { return (std::size_t{1} << N) - 1; }

std::vector<Point> ProperEmbedding::leaves() const {
  return {nodes.begin() + static_cast<long>(first_leaf_heap(N)), nodes.end()};
}

std::string to_string(EmbeddingFamily f) {
  return f == EmbeddingFamily::kLatticeAligned ? "lattice_aligned" : "full";
}

std::vector<Point> child_offsets(const ScaleLadder& ladder, int d, int k,
                                 int which, EmbeddingFamily family) {
  if (k < 0 || k >= ladder.N) throw std::invalid_argument("node has no children");
  if (which != 1 && which != 2) throw std::invalid_argument("child is 1 or 2");
  const long parent_scale = ladder.scale(ladder.N - k);
  const long unit = family == EmbeddingFamily::kLatticeAligned
                        ? parent_scale
                        : ladder.scale(ladder.N - k - 1);
  const int radius = family == EmbeddingFamily::kLatticeAligned ? which : 6 * which;
  std::vector<Point> out;
  for (const auto& v : linf_box(Point::zero(d), radius).points()) {
    if (linf_norm(v) == radius) out.push_back(v.scaled(static_cast<int>(unit)));
  }
  return out;
}

std::uint64_t choices_per_node(int d, EmbeddingFamily family) {
  auto ipow = [](std::uint64_t b, int e) {
    std::uint64_t v = 1;
    for (int i = 0; i < e; ++i) v *= b;
    return v;
  };
  if (family == EmbeddingFamily::kLatticeAligned) {
    return (ipow(3, d) - 1) * (ipow(5, d) - ipow(3, d));
  }
  return (ipow(13, d) - ipow(11, d)) * (ipow(25, d) - ipow(23, d));
}

long double embedding_count(int N, int d, EmbeddingFamily family) {
  if (N < 0) throw std::invalid_argument("N must be >= 0");
  return std::pow(static_cast<long double>(choices_per_node(d, family)),
                  static_cast<long double>(first_leaf_heap(N)));
}

std::uint64_t enumerate_embeddings(
    int N, int d, long L,
    const std::function<void(const ProperEmbedding&)>& visit,
    EmbeddingFamily family, std::uint64_t guard) {
  if (N < 0 || L < 1 || d < 1 || d > kMaxDim) {
    throw std::invalid_argument("bad embedding parameters");
  }
  const long double total = embedding_count(N, d, family);
  if (total > static_cast<long double>(guard)) {
    throw std::length_error("embedding count exceeds the enumeration guard");
  }
  const ScaleLadder ladder{L, N};
  const std::size_t internal = first_leaf_heap(N);
  // Offsets per depth and child.
  std::vector<std::array<std::vector<Point>, 2>> offsets(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    offsets[k][0] = child_offsets(ladder, d, k, 1, family);
    offsets[k][1] = child_offsets(ladder, d, k, 2, family);
  }
  std::vector<int> depth(internal);
  for (std::size_t i = 0; i < internal; ++i) depth[i] = TreeIndex::from_heap(i).depth();

  ProperEmbedding T{N, L, d, std::vector<Point>(tree_size(N), Point::zero(d))};
  std::vector<std::size_t> digit(2 * internal, 0);
  auto rebuild = [&] {
    for (std::size_t i = 0; i < internal; ++i) {
      const auto& off = offsets[static_cast<std::size_t>(depth[i])];
      T.nodes[2 * i + 1] = T.nodes[i] + off[0][digit[2 * i]];
      T.nodes[2 * i + 2] = T.nodes[i] + off[1][digit[2 * i + 1]];
    }
  };
  std::uint64_t count = 0;
  while (true) {
    rebuild();
    if (visit) visit(T);
    ++count;
    // Odometer increment, least significant digit last.
    std::size_t pos = digit.size();
    while (pos > 0) {
      --pos;
      const auto& list = offsets[static_cast<std::size_t>(depth[pos / 2])][pos % 2];
      if (++digit[pos] < list.size()) break;
      digit[pos] = 0;
      if (pos == 0) return count;
    }
    if (digit.empty()) return count;
  }
}

std::string embedding_violation(const ProperEmbedding& T) {
  if (T.N < 0 || T.L < 1) return "bad parameters";
  if (T.nodes.size() != tree_size(T.N)) return "wrong number of nodes";
  const ScaleLadder ladder{T.L, T.N};
  for (const auto& p : T.nodes) {
    if (p.dim() != T.d) return "dimension mismatch";
  }
  if (T.nodes[0] != Point::zero(T.d)) return "property 1: root is not the origin";
  for (std::size_t i = 0; i < T.nodes.size(); ++i) {
    const int k = TreeIndex::from_heap(i).depth();
    if (!ladder.on_lattice(T.nodes[i], T.N - k)) {
      return "property 2: node " + TreeIndex::from_heap(i).to_string() +
             " is off the lattice";
    }
  }
  for (std::size_t i = 0; i < first_leaf_heap(T.N); ++i) {
    const int k = TreeIndex::from_heap(i).depth();
    const long s = ladder.scale(T.N - k);
    if (linf_dist(T.nodes[2 * i + 1], T.nodes[i]) != s ||
        linf_dist(T.nodes[2 * i + 2], T.nodes[i]) != 2 * s) {
      return "property 3: child offsets of node " +
             TreeIndex::from_heap(i).to_string();
    }
  }
  return {};
}

bool validate_embedding(const ProperEmbedding& T) {
  return embedding_violation(T).empty();
}

ProperEmbedding random_embedding(int N, int d, long L, Rng& rng,
                                 EmbeddingFamily family) {
  if (N < 0 || L < 1) throw std::invalid_argument("bad embedding parameters");
  const ScaleLadder ladder{L, N};
  ProperEmbedding T{N, L, d, std::vector<Point>(tree_size(N), Point::zero(d))};
  std::vector<std::array<std::vector<Point>, 2>> offsets(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    offsets[k][0] = child_offsets(ladder, d, k, 1, family);
    offsets[k][1] = child_offsets(ladder, d, k, 2, family);
  }
  for (std::size_t i = 0; i < first_leaf_heap(N); ++i) {
    const auto& off = offsets[static_cast<std::size_t>(TreeIndex::from_heap(i).depth())];
    T.nodes[2 * i + 1] = T.nodes[i] + off[0][uniform_below(rng, off[0].size())];
    T.nodes[2 * i + 2] = T.nodes[i] + off[1][uniform_below(rng, off[1].size())];
  }
  return T;
}

long box_distance(const Point& a, const Point& b, long r) {
  return std::max(0L, linf_dist(a, b) - 2 * r);
}

SparsityResult check_sparsity(const ProperEmbedding& T, std::size_t leaf_m0,
                              int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (const auto err = embedding_violation(T); !err.empty()) {
    throw std::invalid_argument("invalid embedding: " + err);
  }
  if (leaf_m0 >= T.leaf_count()) throw std::invalid_argument("no such leaf");
  const long double threshold =
      static_cast<long double>(pow6(k)) * static_cast<long double>(T.L) / 2.0L;
  SparsityResult res;
  res.bound = std::uint64_t{1} << (k - 1);
  for (std::size_t j = 0; j < T.leaf_count(); ++j) {
    if (j == leaf_m0) continue;
    if (static_cast<long double>(box_distance(T.leaf(leaf_m0), T.leaf(j), 2 * T.L)) <=
        threshold) {
      ++res.count;
    }
  }
  res.pass = res.count <= res.bound;
  return res;
}

std::vector<SparsityAuditRow> sparsity_audit(const ProperEmbedding& T, int k_max) {
  std::vector<SparsityAuditRow> rows;
  const std::size_t n = T.leaf_count();
  // Pairwise box distances once, then counts per k.
  std::vector<long> dist(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = box_distance(T.leaf(i), T.leaf(j), 2 * T.L);
    }
  }
  for (std::size_t m0 = 0; m0 < n; ++m0) {
    for (int k = 1; k <= k_max; ++k) {
      const long double threshold =
          static_cast<long double>(pow6(k)) * static_cast<long double>(T.L) / 2.0L;
      SparsityResult r;
      r.bound = std::uint64_t{1} << (k - 1);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != m0 && static_cast<long double>(dist[m0 * n + j]) <= threshold) ++r.count;
      }
      r.pass = r.count <= r.bound;
      rows.push_back({m0, k, r});
    }
  }
  return rows;
}

bool leaf_boxes_disjoint(const ProperEmbedding& T) {
  const auto leaves = T.leaves();
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (std::size_t j = i + 1; j < leaves.size(); ++j) {
      if (linf_dist(leaves[i], leaves[j]) <= 4 * T.L) return false;
    }
  }
  return true;
}

bool is_star_path(const Path& gamma) {
  if (gamma.empty()) return false;
  for (std::size_t i = 1; i < gamma.size(); ++i) {
    if (gamma[i].dim() != gamma[0].dim() || linf_dist(gamma[i - 1], gamma[i]) != 1) {
      return false;
    }
  }
  return true;
}

namespace {

bool meets_sphere(const Path& gamma, const Point& c, long r) {
  return std::any_of(gamma.begin(), gamma.end(),
                     [&](const Point& p) { return linf_dist(p, c) == r; });
}

// Rounds every coordinate of v except a maximal one to a multiple of unit.
Point round_offset(const Point& v, long unit) {
  int arg = 0;
  for (int i = 1; i < v.dim(); ++i) {
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  }
  Point out = v;
  for (int i = 0; i < v.dim(); ++i) {
    if (i == arg) continue;
    const double q = std::round(static_cast<double>(v[i]) / static_cast<double>(unit));
    out[i] = static_cast<int>(q * static_cast<double>(unit));
  }
  return out;
}

}  // namespace

bool path_crosses_leaves(const Path& gamma, const ProperEmbedding& T) {
  for (const auto& c : T.leaves()) {
    if (!meets_sphere(gamma, c, T.L - 1) || !meets_sphere(gamma, c, 2 * T.L)) {
      return false;
    }
  }
  return true;
}

ProperEmbedding embed_from_path(const Path& gamma, int N, long L) {
  if (N < 0 || L < 1) throw std::invalid_argument("bad embedding parameters");
  if (!is_star_path(gamma)) throw std::invalid_argument("path is not *-connected");
  const int d = gamma.front().dim();
  const ScaleLadder ladder{L, N};
  const Point origin = Point::zero(d);
  if (!meets_sphere(gamma, origin, ladder.scale(N) - 1) ||
      !meets_sphere(gamma, origin, 2 * ladder.scale(N))) {
    throw std::invalid_argument("path does not cross S(L_N - 1) -> S(2 L_N)");
  }
  ProperEmbedding T{N, L, d, std::vector<Point>(tree_size(N), origin)};
  // A node c of scale s whose annulus gamma crosses has gamma points on S(c, s)
  // and S(c, 2s). Rounding such a point to the child lattice moves it by at
  // most half a child scale, so gamma also crosses the child's annulus.
  for (std::size_t i = 0; i < first_leaf_heap(N); ++i) {
    const int k = TreeIndex::from_heap(i).depth();
    const long s = ladder.scale(N - k);
    const long child_unit = ladder.scale(N - k - 1);
    const Point& c = T.nodes[i];
    for (int which = 1; which <= 2; ++which) {
      const long r = which * s;
      auto it = std::find_if(gamma.begin(), gamma.end(),
                             [&](const Point& p) { return linf_dist(p, c) == r; });
      if (it == gamma.end()) {
        throw std::logic_error("path misses S(" + c.to_string() + "," +
                               std::to_string(r) + ")");
      }
      T.nodes[2 * i + static_cast<std::size_t>(which)] =
          c + round_offset(*it - c, child_unit);
    }
  }
  if (const auto err = embedding_violation(T); !err.empty()) {
    throw std::logic_error("embed_from_path produced an invalid embedding: " + err);
  }
  if (!path_crosses_leaves(gamma, T)) {
    throw std::logic_error("embed_from_path: a leaf box is not crossed");
  }
  return T;
}

Path random_crossing_path(int N, long L, int d, Rng& rng, double outward_bias) {
  const ScaleLadder ladder{L, N};
  const long inner = ladder.scale(N) - 1;
  const long outer = 2 * ladder.scale(N);
  Point p = Point::zero(d);
  const int axis = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(d)));
  for (int i = 0; i < d; ++i) {
    p[i] = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(2 * inner + 1))) -
           static_cast<int>(inner);
  }
  p[axis] = static_cast<int>(bernoulli(rng, 0.5) ? inner : -inner);
  std::vector<Point> steps;
  for (const auto& o : linf_box(Point::zero(d), 1).points()) {
    if (o != Point::zero(d)) steps.push_back(o);
  }
  Path gamma{p};
  std::vector<Point> outward;
  while (linf_norm(p) < outer) {
    Point next;
    if (bernoulli(rng, outward_bias)) {
      outward.clear();
      const long n0 = linf_norm(p);
      for (const auto& o : steps) {
        if (linf_norm(p + o) > n0) outward.push_back(o);
      }
      next = p + outward[uniform_below(rng, outward.size())];
    } else {
      next = p + steps[uniform_below(rng, steps.size())];
    }
    p = next;
    gamma.push_back(p);
  }
  return gamma;
}

NeighborhoodCount neighborhood_count(const ProperEmbedding& T, const Point& u,
                                     int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!leaf_boxes_disjoint(T)) throw std::invalid_argument("leaf boxes overlap");
  const long half = 2 * T.L;
  bool in_A = false;
  for (const auto& c : T.leaves()) in_A = in_A || linf_dist(u, c) <= half;
  if (!in_A) throw std::invalid_argument("u is not in A");
  const long double r_exact =
      static_cast<long double>(pow6(k)) * static_cast<long double>(T.L) / 2.0L;
  const long r = static_cast<long>(std::floor(r_exact));
  NeighborhoodCount out;
  for (const auto& c : T.leaves()) {
    std::uint64_t cnt = 1;
    for (int i = 0; i < T.d && cnt; ++i) {
      const long lo = std::max<long>(c[i] - half, u[i] - r);
      const long hi = std::min<long>(c[i] + half, u[i] + r);
      cnt *= hi >= lo ? static_cast<std::uint64_t>(hi - lo + 1) : 0;
    }
    out.count += cnt;
  }
  out.count -= 1;  // u itself
  out.bound = linf_ball_cardinality(static_cast<std::uint64_t>(half), T.d) *
              (std::uint64_t{1} << (k - 1));
  out.pass = out.count <= out.bound;
  return out;
}

PairSumConstants pair_sum_constants(int d, long L) {
  if (d < 3) throw std::invalid_argument("pair-sum constants need d >= 3");
  PairSumConstants k;
  for (const auto& w : linf_box(Point::zero(d), static_cast<int>(3 * L)).points()) {
    const long n = linf_norm(w);
    if (n > 0) k.C += std::pow(static_cast<double>(n), 2.0 - d);
  }
  const double box = static_cast<double>(linf_ball_cardinality(static_cast<std::uint64_t>(2 * L), d));
  double tail = 0.0;
  for (int j = 1; j < 4000; ++j) {
    const double term = box * std::pow(2.0, j) *
                        std::pow(std::pow(6.0, j) * static_cast<double>(L) / 2.0, 2.0 - d);
    tail += term;
    if (term < 1e-18 * tail || !std::isfinite(term)) break;
  }
  k.C2 = k.C + tail;
  k.Cprime = box * k.C2;
  return k;
}

PairSumEvaluator::PairSumEvaluator(int d, long L)
    : d_(d), L_(L), constants_(pair_sum_constants(d, L)) {
  const long span = 4 * L;
  for (const auto& z : linf_box(Point::zero(d), static_cast<int>(span)).points()) {
    double c = 1.0;
    for (int i = 0; i < d; ++i) c *= static_cast<double>(span + 1 - std::abs(z[i]));
    kernel_.push_back({z, c});
  }
  for (const auto& [z, c] : kernel_) {
    const long n = linf_norm(z);
    if (n > 0) self_ += c * inverse_power(n);
  }
  self_ *= 0.5;
}

double PairSumEvaluator::inverse_power(long n) {
  while (static_cast<long>(powers_.size()) <= n) {
    const auto m = static_cast<double>(powers_.size());
    powers_.push_back(m == 0.0 ? 0.0 : std::pow(m, 2.0 - d_));
  }
  return powers_[static_cast<std::size_t>(n)];
}

double PairSumEvaluator::box_pair(const Point& delta) {
  const Point key = canonical_difference(delta);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  inverse_power(linf_norm(key) + 4 * L_);
  double s = 0.0;
  for (const auto& [z, c] : kernel_) {
    long n = 0;
    for (int i = 0; i < d_; ++i) n = std::max<long>(n, std::abs(key[i] + z[i]));
    s += c * powers_[static_cast<std::size_t>(n)];
  }
  cache_.emplace(key, s);
  return s;
}

double PairSumEvaluator::pair_sum(const ProperEmbedding& T) {
  if (T.d != d_ || T.L != L_) throw std::invalid_argument("evaluator (d, L) mismatch");
  if (!leaf_boxes_disjoint(T)) throw std::invalid_argument("leaf boxes overlap");
  const auto leaves = T.leaves();
  double total = self_ * static_cast<double>(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (std::size_t j = i + 1; j < leaves.size(); ++j) {
      total += box_pair(leaves[j] - leaves[i]);
    }
  }
  return total;
}

PairSumResult check_pair_sum(const ProperEmbedding& T, PairSumEvaluator& eval) {
  PairSumResult r;
  r.sum = eval.pair_sum(T);
  r.bound = eval.constants().Cprime * std::ldexp(1.0, T.N);
  r.pass = r.sum <= r.bound;
  return r;
}

std::string embedding_to_json(const ProperEmbedding& T) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["N"] = T.N;
  j["d"] = T.d;
  j["L"] = T.L;
  nlohmann::ordered_json nodes = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < T.nodes.size(); ++i) {
    nodes[TreeIndex::from_heap(i).to_string()] = T.nodes[i].coords();
  }
  j["nodes"] = std::move(nodes);
  return j.dump(1) + '\n';
}

ProperEmbedding embedding_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ProperEmbedding T;
  T.N = j.at("N").get<int>();
  T.d = j.at("d").get<int>();
  T.L = j.at("L").get<long>();
  T.nodes.assign(tree_size(T.N), Point::zero(T.d));
  for (const auto& [key, value] : j.at("nodes").items()) {
    const auto idx = TreeIndex::parse(key).heap();
    if (idx >= T.nodes.size()) throw std::invalid_argument("node beyond depth N");
    T.nodes[idx] = Point(value.get<std::vector<int>>());
  }
  return T;
}

}  // namespace voterperc
