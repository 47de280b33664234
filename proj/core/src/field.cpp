#include "voterperc/field.hpp"

#include <algorithm>
#include <stdexcept>

namespace voterperc {

FieldSample FieldSample::on_box(const BoxSpec& window,
                                std::vector<std::uint8_t> values,
                                Provenance provenance) {
  if (window.norm != Norm::kLinf) {
    throw std::invalid_argument("field windows are l-infinity boxes");
  }
  if (values.size() != window.cardinality()) {
    throw std::invalid_argument("value count does not match window size");
  }
  FieldSample f;
  const int d = window.dim();
  f.origin_ = Point::zero(d);
  f.extent_ = Point::zero(d);
  for (int i = 0; i < d; ++i) {
    f.origin_[i] = window.center[i] - window.radius;
    f.extent_[i] = 2 * window.radius + 1;
  }
  for (auto v : values) {
    if (v > 1) throw std::invalid_argument("field values must be 0 or 1");
  }
  f.values_ = std::move(values);
  f.defined_count_ = f.values_.size();
  f.provenance_ = std::move(provenance);
  return f;
}

FieldSample FieldSample::constant(const BoxSpec& window, std::uint8_t value,
                                  Provenance provenance) {
  return on_box(window, std::vector<std::uint8_t>(window.cardinality(), value),
                std::move(provenance));
}

FieldSample FieldSample::on_sites(std::span<const Point> sites,
                                  std::span<const std::uint8_t> values,
                                  Provenance provenance) {
  if (sites.empty()) throw std::invalid_argument("empty site set");
  if (sites.size() != values.size()) {
    throw std::invalid_argument("sites and values differ in length");
  }
  const int d = sites.front().dim();
  Point lo = sites.front(), hi = sites.front();
  for (const auto& s : sites) {
    if (s.dim() != d) throw std::invalid_argument("mixed dimensions");
    for (int i = 0; i < d; ++i) {
      lo[i] = std::min(lo[i], s[i]);
      hi[i] = std::max(hi[i], s[i]);
    }
  }
  FieldSample f;
  f.origin_ = lo;
  f.extent_ = Point::zero(d);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    f.extent_[i] = hi[i] - lo[i] + 1;
    total *= static_cast<std::size_t>(f.extent_[i]);
  }
  f.values_.assign(total, kUndefined);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (values[k] > 1) throw std::invalid_argument("field values must be 0 or 1");
    const auto idx = static_cast<std::size_t>(f.index_of(sites[k]));
    if (f.values_[idx] != kUndefined) {
      throw std::invalid_argument("duplicate site " + sites[k].to_string());
    }
    f.values_[idx] = values[k];
  }
  f.defined_count_ = sites.size();
  f.provenance_ = std::move(provenance);
  return f;
}

BoxSpec FieldSample::window() const {
  const int d = dim();
  if (!is_full_box()) throw std::logic_error("sample is not a full box");
  for (int i = 1; i < d; ++i) {
    if (extent_[i] != extent_[0]) throw std::logic_error("window is not a cube");
  }
  if (extent_[0] % 2 == 0) throw std::logic_error("window has even side");
  const int r = (extent_[0] - 1) / 2;
  Point c = origin_;
  for (int i = 0; i < d; ++i) c[i] += r;
  return linf_box(c, r);
}

long FieldSample::index_of(const Point& p) const {
  if (p.dim() != dim()) return -1;
  long idx = 0;
  for (int i = 0; i < dim(); ++i) {
    const int off = p[i] - origin_[i];
    if (off < 0 || off >= extent_[i]) return -1;
    idx = idx * extent_[i] + off;
  }
  return idx;
}

Point FieldSample::point_at(std::size_t index) const {
  Point p = origin_;
  for (int i = dim() - 1; i >= 0; --i) {
    const auto e = static_cast<std::size_t>(extent_[i]);
    p[i] += static_cast<int>(index % e);
    index /= e;
  }
  return p;
}

bool FieldSample::contains(const Point& p) const {
  const long idx = index_of(p);
  return idx >= 0 && values_[static_cast<std::size_t>(idx)] != kUndefined;
}

std::uint8_t FieldSample::value_or_undefined(const Point& p) const {
  const long idx = index_of(p);
  return idx < 0 ? kUndefined : values_[static_cast<std::size_t>(idx)];
}

std::uint8_t FieldSample::at(const Point& p) const {
  const auto v = value_or_undefined(p);
  if (v == kUndefined) {
    throw std::out_of_range("site outside sample: " + p.to_string());
  }
  return v;
}

void FieldSample::set(const Point& p, std::uint8_t v) {
  if (v > 1) throw std::invalid_argument("field values must be 0 or 1");
  const long idx = index_of(p);
  if (idx < 0 || values_[static_cast<std::size_t>(idx)] == kUndefined) {
    throw std::out_of_range("site outside sample: " + p.to_string());
  }
  values_[static_cast<std::size_t>(idx)] = v;
}

std::vector<Point> FieldSample::sites() const {
  std::vector<Point> out;
  out.reserve(defined_count_);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] != kUndefined) out.push_back(point_at(i));
  }
  return out;
}

std::size_t FieldSample::count_ones() const {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), 1));
}

FieldSample shift_config(const FieldSample& xi, const Point& x) {
  FieldSample out = xi;
  out.origin_ += x;
  return out;
}

}  // namespace voterperc
