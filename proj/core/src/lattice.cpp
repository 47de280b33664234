#include "voterperc/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace voterperc {

namespace {

void check_dim(int d) {
  if (d < 1 || d > kMaxDim) {
    throw std::invalid_argument("dimension must be in [1, " +
                                std::to_string(kMaxDim) + "], got " +
                                std::to_string(d));
  }
}

void check_same_dim(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("dimension mismatch: " + a.to_string() +
                                " vs " + b.to_string());
  }
}

}  // namespace

Point::Point(std::initializer_list<int> coords) {
  check_dim(static_cast<int>(coords.size()));
  dim_ = static_cast<std::int32_t>(coords.size());
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Point::Point(const std::vector<int>& coords) {
  check_dim(static_cast<int>(coords.size()));
  dim_ = static_cast<std::int32_t>(coords.size());
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Point Point::zero(int d) {
  check_dim(d);
  Point p;
  p.dim_ = d;
  return p;
}

Point Point::unit(int d, int axis, int sign) {
  Point p = zero(d);
  if (axis < 0 || axis >= d) throw std::invalid_argument("axis out of range");
  p.c_[static_cast<std::size_t>(axis)] = sign;
  return p;
}

Point& Point::operator+=(const Point& o) {
  check_same_dim(*this, o);
  for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

Point& Point::operator-=(const Point& o) {
  check_same_dim(*this, o);
  for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
  return *this;
}

Point Point::operator-() const {
  Point p = *this;
  for (int i = 0; i < dim_; ++i) p.c_[i] = -p.c_[i];
  return p;
}

Point Point::scaled(int factor) const {
  Point p = *this;
  for (int i = 0; i < dim_; ++i) p.c_[i] *= factor;
  return p;
}

std::vector<int> Point::coords() const {
  return {c_.begin(), c_.begin() + dim_};
}

std::string Point::to_string() const {
  std::string s = "(";
  for (int i = 0; i < dim_; ++i) {
    if (i) s += ",";
    s += std::to_string(c_[i]);
  }
  return s + ")";
}

Point operator+(Point a, const Point& b) { return a += b; }
Point operator-(Point a, const Point& b) { return a -= b; }

long linf_norm(const Point& x) {
  long m = 0;
  for (int i = 0; i < x.dim(); ++i) m = std::max(m, std::labs(x[i]));
  return m;
}

long l1_norm(const Point& x) {
  long s = 0;
  for (int i = 0; i < x.dim(); ++i) s += std::labs(x[i]);
  return s;
}

long linf_dist(const Point& a, const Point& b) { return linf_norm(a - b); }
long l1_dist(const Point& a, const Point& b) { return l1_norm(a - b); }

bool BoxSpec::contains(const Point& p) const {
  if (p.dim() != center.dim()) return false;
  const Point diff = p - center;
  return (norm == Norm::kLinf ? linf_norm(diff) : l1_norm(diff)) <= radius;
}

std::size_t BoxSpec::cardinality() const {
  if (norm == Norm::kLinf) {
    return static_cast<std::size_t>(
        linf_ball_cardinality(static_cast<std::uint64_t>(radius), dim()));
  }
  return l1_ball_cardinality(dim(), radius);
}

std::vector<Point> BoxSpec::points() const {
  const int d = dim();
  std::vector<Point> out;
  out.reserve(cardinality());
  Point offset = Point::zero(d);
  for (int i = 0; i < d; ++i) offset[i] = -radius;
  while (true) {
    const bool inside =
        norm == Norm::kLinf || l1_norm(offset) <= static_cast<long>(radius);
    if (inside) out.push_back(center + offset);
    int axis = d - 1;
    while (axis >= 0 && offset[axis] == radius) {
      offset[axis] = -radius;
      --axis;
    }
    if (axis < 0) break;
    ++offset[axis];
  }
  return out;
}

BoxSpec linf_box(const Point& center, int radius) {
  if (radius < 0) throw std::invalid_argument("negative box radius");
  return BoxSpec{center, radius, Norm::kLinf};
}

std::vector<Point> l1_ball(const Point& center, int R) {
  if (R < 1) {
    throw std::invalid_argument("l1 ball radius must be >= 1 (got " +
                                std::to_string(R) + ")");
  }
  return BoxSpec{center, R, Norm::kL1}.points();
}

std::size_t l1_ball_cardinality(int d, int R) {
  check_dim(d);
  if (R < 0) return 0;
  // Count by dynamic programming over coordinates: ways[s] = #vectors with
  // l1 norm exactly s among the coordinates processed so far.
  std::vector<std::size_t> ways(static_cast<std::size_t>(R) + 1, 0);
  ways[0] = 1;
  for (int axis = 0; axis < d; ++axis) {
    std::vector<std::size_t> next(ways.size(), 0);
    for (int s = 0; s <= R; ++s) {
      if (!ways[static_cast<std::size_t>(s)]) continue;
      for (int v = 0; s + v <= R; ++v) {
        next[static_cast<std::size_t>(s + v)] +=
            ways[static_cast<std::size_t>(s)] * (v == 0 ? 1 : 2);
      }
    }
    ways = std::move(next);
  }
  std::size_t total = 0;
  for (auto w : ways) total += w;
  return total;
}

std::uint64_t linf_ball_cardinality(std::uint64_t L, int d) {
  check_dim(d);
  std::uint64_t r = 1;
  for (int i = 0; i < d; ++i) r *= 2 * L + 1;
  return r;
}

bool on_linf_sphere(const Point& p, const Point& center, long r) {
  return linf_dist(p, center) == r;
}

std::uint64_t pack_key(const Point& p) {
  const int d = p.dim();
  const int bits = d <= 3 ? 21 : 16;
  const long half = 1L << (bits - 1);
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  std::uint64_t key = 0;
  for (int i = 0; i < d; ++i) {
    const long v = p[i];
    if (v < -half || v >= half) {
      throw std::out_of_range("coordinate outside packable range: " +
                              p.to_string());
    }
    key = (key << bits) | (static_cast<std::uint64_t>(v + half) & mask);
  }
  return key;
}

std::size_t PointHash::operator()(const Point& p) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p.dim());
  for (int i = 0; i < p.dim(); ++i) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(p[i])) +
         0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace voterperc
