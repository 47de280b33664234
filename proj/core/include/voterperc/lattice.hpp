#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace voterperc {

inline constexpr int kMaxDim = 4;

// A vertex of Z^d, 1 <= d <= kMaxDim. Unused trailing coordinates are zero so
// that defaulted comparison and hashing only see the live part.
class Point {
 public:
  Point() = default;
  Point(std::initializer_list<int> coords);
  explicit Point(const std::vector<int>& coords);

  static Point zero(int d);
  static Point unit(int d, int axis, int sign = 1);

  int dim() const { return dim_; }
  int operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  Point& operator+=(const Point& o);
  Point& operator-=(const Point& o);
  Point operator-() const;
  Point scaled(int factor) const;

  // Lexicographic on coordinates. This is the fixed well-ordering used for
  // tie-breaking among marks.
  friend auto operator<=>(const Point&, const Point&) = default;
  friend bool operator==(const Point&, const Point&) = default;

  std::vector<int> coords() const;
  std::string to_string() const;

 private:
  std::array<std::int32_t, kMaxDim> c_{};
  std::int32_t dim_ = 0;
};

Point operator+(Point a, const Point& b);
Point operator-(Point a, const Point& b);

// Strict well-ordering on points of one dimension (lexicographic).
struct WellOrder {
  bool operator()(const Point& a, const Point& b) const { return a < b; }
};

// |x| in the notation of the model: the l-infinity norm.
long linf_norm(const Point& x);
long l1_norm(const Point& x);
long linf_dist(const Point& a, const Point& b);
long l1_dist(const Point& a, const Point& b);

enum class Norm { kLinf, kL1 };

// Ball {y : |y - center| <= radius} under the given norm.
struct BoxSpec {
  Point center;
  int radius = 0;
  Norm norm = Norm::kLinf;

  int dim() const { return center.dim(); }
  bool contains(const Point& p) const;
  std::size_t cardinality() const;
  // Enumerated in lexicographic order.
  std::vector<Point> points() const;
};

BoxSpec linf_box(const Point& center, int radius);

// Jump-destination ball B_1(center, R); R must be >= 1.
std::vector<Point> l1_ball(const Point& center, int R);
std::size_t l1_ball_cardinality(int d, int R);

// (2L+1)^d, the size of the l-infinity ball B(L).
std::uint64_t linf_ball_cardinality(std::uint64_t L, int d);

// The sphere S(center, r) = {y : |y - center| = r}.
bool on_linf_sphere(const Point& p, const Point& center, long r);

// 64-bit key for hashing positions. Throws std::out_of_range when a
// coordinate does not fit in the per-axis budget (2^20 for d <= 3).
std::uint64_t pack_key(const Point& p);

struct PointHash {
  std::size_t operator()(const Point& p) const;
};

}  // namespace voterperc
