#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "voterperc/lattice.hpp"

namespace voterperc {

// Where a sample came from. `horizon` holds the stopping tolerance for the
// stationary sampler and the time t for the finite-time samplers.
struct Provenance {
  std::string sampler;
  int d = 0;
  int R = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string horizon_kind;  // "eps_stop", "t", or empty
  double horizon = 0.0;
  std::map<std::string, std::string> extra;
};

// A {0,1} configuration on a finite set of sites. Storage is the l-infinity
// bounding box of the sites in lexicographic order; sites of the box that are
// not part of the sample hold kUndefined.
class FieldSample {
 public:
  static constexpr std::uint8_t kUndefined = 0xFF;

  FieldSample() = default;

  // Values for every site of `window`, in BoxSpec::points() order.
  static FieldSample on_box(const BoxSpec& window,
                            std::vector<std::uint8_t> values,
                            Provenance provenance = {});
  // Values aligned with `sites` (pairwise distinct, same dimension).
  static FieldSample on_sites(std::span<const Point> sites,
                              std::span<const std::uint8_t> values,
                              Provenance provenance = {});
  static FieldSample constant(const BoxSpec& window, std::uint8_t value,
                              Provenance provenance = {});

  int dim() const { return origin_.dim(); }
  // Lowest corner and side lengths of the storage box.
  const Point& origin() const { return origin_; }
  const Point& extent() const { return extent_; }
  bool is_full_box() const { return defined_count_ == values_.size(); }
  // Valid when is_full_box(): the window as an l-infinity ball, if the box
  // is a cube.
  BoxSpec window() const;

  bool contains(const Point& p) const;
  // Throws std::out_of_range outside the sample.
  std::uint8_t at(const Point& p) const;
  // Same, but returns kUndefined outside.
  std::uint8_t value_or_undefined(const Point& p) const;
  void set(const Point& p, std::uint8_t v);

  std::size_t size() const { return defined_count_; }
  std::size_t storage_size() const { return values_.size(); }
  std::span<const std::uint8_t> raw() const { return values_; }
  std::vector<Point> sites() const;
  std::size_t count_ones() const;

  // Linear index into raw() for p inside the storage box, -1 otherwise.
  long index_of(const Point& p) const;
  Point point_at(std::size_t index) const;

  const Provenance& provenance() const { return provenance_; }
  Provenance& provenance() { return provenance_; }

  friend FieldSample shift_config(const FieldSample& xi, const Point& x);

  friend bool operator==(const FieldSample& a, const FieldSample& b) {
    return a.origin_ == b.origin_ && a.extent_ == b.extent_ &&
           a.values_ == b.values_;
  }

 private:
  Point origin_;
  Point extent_;
  std::vector<std::uint8_t> values_;
  std::size_t defined_count_ = 0;
  Provenance provenance_;
};

// (tau_x xi)(y) = xi(y - x): the window moves along with the configuration.
FieldSample shift_config(const FieldSample& xi, const Point& x);

}  // namespace voterperc
