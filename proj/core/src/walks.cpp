#include "voterperc/walks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace voterperc {

JumpKernel::JumpKernel(int d, int R) : d_(d), R_(R) {
  if (R < 1) throw std::invalid_argument("jump range R must be >= 1");
  for (const auto& p : l1_ball(Point::zero(d), R)) {
    if (p != Point::zero(d)) offsets_.push_back(p);
  }
}

WalkSystem::WalkSystem(int R, std::span<const Point> starts, Rng rng)
    : WalkSystem(std::make_shared<const JumpKernel>(
                     starts.empty() ? 1 : starts.front().dim(), R),
                 starts, std::move(rng)) {}

WalkSystem::WalkSystem(std::shared_ptr<const JumpKernel> kernel,
                       std::span<const Point> starts, Rng rng)
    : kernel_(std::move(kernel)), rng_(std::move(rng)) {
  positions_.assign(starts.begin(), starts.end());
  alive_.resize(positions_.size());
  slot_.resize(positions_.size());
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if (positions_[i].dim() != kernel_->dim()) {
      throw std::invalid_argument("walker start dimension mismatch");
    }
    alive_[i] = static_cast<WalkerId>(i);
    slot_[i] = static_cast<std::uint32_t>(i);
  }
  if (positions_.size() > kIndexThreshold) {
    indexed_ = true;
    next_at_site_.assign(positions_.size(), kNoWalker);
    head_.reserve(positions_.size() * 2);
    for (WalkerId id : alive_) index_insert(id);
  }
}

bool WalkSystem::alive(WalkerId id) const {
  return id < positions_.size() && slot_[id] != kNoWalker;
}

void WalkSystem::index_insert(WalkerId id) {
  const auto key = pack_key(positions_[id]);
  auto [it, inserted] = head_.try_emplace(key, id);
  if (!inserted) {
    next_at_site_[id] = it->second;
    it->second = id;
  } else {
    next_at_site_[id] = kNoWalker;
  }
}

void WalkSystem::index_remove(WalkerId id) {
  const auto key = pack_key(positions_[id]);
  auto it = head_.find(key);
  if (it == head_.end()) throw std::logic_error("position index out of sync");
  if (it->second == id) {
    if (next_at_site_[id] == kNoWalker) {
      head_.erase(it);
    } else {
      it->second = next_at_site_[id];
    }
  } else {
    WalkerId prev = it->second;
    while (next_at_site_[prev] != id) {
      prev = next_at_site_[prev];
      if (prev == kNoWalker) throw std::logic_error("position index out of sync");
    }
    next_at_site_[prev] = next_at_site_[id];
  }
  next_at_site_[id] = kNoWalker;
}

WalkerId WalkSystem::occupant(const Point& site, WalkerId exclude) const {
  if (indexed_) {
    auto it = head_.find(pack_key(site));
    if (it == head_.end()) return kNoWalker;
    for (WalkerId w = it->second; w != kNoWalker; w = next_at_site_[w]) {
      if (w != exclude) return w;
    }
    return kNoWalker;
  }
  for (WalkerId w : alive_) {
    if (w != exclude && positions_[w] == site) return w;
  }
  return kNoWalker;
}

WalkEvent WalkSystem::jump(WalkerId id) {
  WalkEvent ev;
  ev.time = time_;
  ev.walker = id;
  ev.from = positions_[id];
  if (indexed_) index_remove(id);
  positions_[id] += kernel_->sample(rng_);
  if (indexed_) index_insert(id);
  ev.to = positions_[id];
  ev.coincident = occupant(ev.to, id);
  return ev;
}

WalkEvent WalkSystem::step_walker(WalkerId id) {
  if (!alive(id)) {
    throw std::invalid_argument("walker " + std::to_string(id) + " is not alive");
  }
  return jump(id);
}

WalkEvent WalkSystem::advance_to_next_event() {
  auto ev = advance_until(std::numeric_limits<double>::infinity());
  return *ev;
}

std::optional<WalkEvent> WalkSystem::advance_until(double horizon) {
  if (alive_.empty()) throw std::logic_error("no alive walkers");
  const double dt = exponential(rng_, static_cast<double>(alive_.size()));
  if (time_ + dt > horizon) {
    time_ = horizon;
    return std::nullopt;
  }
  time_ += dt;
  const WalkerId id = alive_[uniform_below(rng_, alive_.size())];
  return jump(id);
}

void WalkSystem::kill(WalkerId id) {
  if (!alive(id)) {
    throw std::invalid_argument("walker " + std::to_string(id) + " is not alive");
  }
  if (indexed_) index_remove(id);
  const std::uint32_t s = slot_[id];
  const WalkerId last = alive_.back();
  alive_[s] = last;
  slot_[last] = s;
  alive_.pop_back();
  slot_[id] = kNoWalker;
}

double TruncationPolicy::effective_escape(long separation, int R) const {
  if (escape_radius > 0.0) return escape_radius;
  return escape_factor * static_cast<double>(std::max<long>(separation, R));
}

std::string TruncationPolicy::describe() const {
  std::ostringstream os;
  if (escape_radius > 0.0) {
    os << "escape_radius=" << escape_radius;
  } else {
    os << "escape_factor=" << escape_factor;
  }
  os << ";t_max=" << t_max;
  return os.str();
}

PairOutcome simulate_pair(const Point& x, const Point& y,
                          const std::shared_ptr<const JumpKernel>& kernel,
                          const TruncationPolicy& policy, Rng& rng) {
  const double escape = policy.effective_escape(linf_dist(x, y), kernel->range());
  // x - y of two independent rate-1 walks is a rate-2 walk with the same
  // symmetric kernel; the walks meet when it hits 0.
  const auto offsets = kernel->offsets();
  const int d = x.dim();
  Point z = x - y;
  double t = 0.0;
  while (true) {
    t += exponential(rng, 2.0);
    if (t > policy.t_max) return PairOutcome::kTimedOut;
    const Point& o = offsets[uniform_below(rng, offsets.size())];
    long norm = 0;
    for (int i = 0; i < d; ++i) {
      z[i] += o[i];
      norm = std::max(norm, static_cast<long>(std::abs(z[i])));
    }
    if (norm == 0) return PairOutcome::kMet;
    if (static_cast<double>(norm) > escape) return PairOutcome::kEscaped;
  }
}

MeetEstimate estimate_h(const Point& x, const Point& y, int R, std::uint64_t n,
                        const TruncationPolicy& policy, std::uint64_t seed,
                        const ParallelMap& pool, double level) {
  if (x.dim() != y.dim()) throw std::invalid_argument("dimension mismatch");
  if (x == y) {
    throw std::invalid_argument("meeting probability needs distinct starts, got " +
                                x.to_string() + " twice");
  }
  if (n < 1) throw std::invalid_argument("n_samples must be >= 1");
  auto kernel = std::make_shared<const JumpKernel>(x.dim(), R);
  struct Counts {
    std::uint64_t met = 0, escaped = 0, timed_out = 0;
  };
  const auto counts = pool.map_reduce(
      static_cast<std::size_t>(n), Counts{},
      [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        Counts c;
        switch (simulate_pair(x, y, kernel, policy, rng)) {
          case PairOutcome::kMet: c.met = 1; break;
          case PairOutcome::kEscaped: c.escaped = 1; break;
          case PairOutcome::kTimedOut: c.timed_out = 1; break;
        }
        return c;
      },
      [](Counts& a, const Counts& b) {
        a.met += b.met;
        a.escaped += b.escaped;
        a.timed_out += b.timed_out;
      });
  MeetEstimate out;
  out.estimate = proportion_estimate(counts.met, n, level);
  out.met = counts.met;
  out.escaped = counts.escaped;
  out.timed_out = counts.timed_out;
  out.policy = policy;
  return out;
}

FEstimate estimate_fR(int R, int d,
                      std::span<const std::pair<Point, Point>> pairs,
                      std::uint64_t n, const TruncationPolicy& policy,
                      std::uint64_t seed, const ParallelMap& pool) {
  if (pairs.empty()) throw std::invalid_argument("empty pair set");
  FEstimate out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [x, y] = pairs[k];
    if (x.dim() != d || y.dim() != d) {
      throw std::invalid_argument("pair dimension differs from d");
    }
    FEstimate::Entry e{x, y, estimate_h(x, y, R, n, policy, derive_seed(seed, k), pool)};
    const double scale = std::pow(static_cast<double>(linf_dist(x, y)), d - 2);
    e.scaled = e.h.estimate.estimate * scale;
    e.scaled_hi = e.h.estimate.ci_hi * scale;
    out.value = std::max(out.value, e.scaled);
    out.upper = std::max(out.upper, e.scaled_hi);
    out.lower = std::max(out.lower, e.h.estimate.ci_lo * scale);
    out.entries.push_back(std::move(e));
  }
  return out;
}

RemeetTable::RemeetTable(int d, int R, std::vector<Row> rows)
    : d_(d), R_(R), rows_(std::move(rows)) {
  std::sort(rows_.begin(), rows_.end(),
            [](const Row& a, const Row& b) { return a.r < b.r; });
  for (const auto& row : rows_) {
    if (row.r < 1) throw std::invalid_argument("remeet table radius must be >= 1");
  }
}

double RemeetTable::q(double r) const {
  if (rows_.empty()) throw std::logic_error("empty remeet table");
  if (r <= rows_.front().r) return rows_.front().ci_hi;
  const auto& last = rows_.back();
  if (r >= last.r) {
    const double c = last.ci_hi * std::pow(static_cast<double>(last.r), d_ - 2);
    return c * std::pow(r, 2 - d_);
  }
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    if (r <= rows_[i].r) {
      const auto& a = rows_[i - 1];
      const auto& b = rows_[i];
      const double qa = std::max(a.ci_hi, 1e-300);
      const double qb = std::max(b.ci_hi, 1e-300);
      const double t = (std::log(r) - std::log(a.r)) /
                       (std::log(b.r) - std::log(static_cast<double>(a.r)));
      return std::exp(std::log(qa) + t * (std::log(qb) - std::log(qa)));
    }
  }
  return last.ci_hi;
}

long RemeetTable::escape_radius_for(double eps) const {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (rows_.empty()) throw std::logic_error("empty remeet table");
  for (const auto& row : rows_) {
    if (row.ci_hi < eps) {
      // Scan down from this row for the first integer radius that qualifies.
      long r = row.r;
      while (r > 1 && q(static_cast<double>(r - 1)) < eps) --r;
      return r;
    }
  }
  if (d_ <= 2) throw std::domain_error("recurrent walk: no escape radius exists");
  const auto& last = rows_.back();
  const double c = last.ci_hi * std::pow(static_cast<double>(last.r), d_ - 2);
  long r = static_cast<long>(std::ceil(std::pow(c / eps, 1.0 / (d_ - 2))));
  while (q(static_cast<double>(r)) >= eps) ++r;
  while (r > last.r + 1 && q(static_cast<double>(r - 1)) < eps) --r;
  return r;
}

std::string RemeetTable::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "d,R,r,remeet_prob_estimate,n,ci_hi\n";
  for (const auto& row : rows_) {
    os << d_ << ',' << R_ << ',' << row.r << ',' << row.estimate << ','
       << row.n << ',' << row.ci_hi << '\n';
  }
  return os.str();
}

RemeetTable RemeetTable::from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int d = 0, R = 0;
  std::vector<Row> rows;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("d,R,r,remeet_prob_estimate,n", 0) != 0) {
        throw std::runtime_error("unexpected calibration header: " + line);
      }
      header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (f.size() < 5) throw std::runtime_error("short calibration row: " + line);
    const int rd = std::stoi(f[0]);
    const int rR = std::stoi(f[1]);
    if (!rows.empty() && (rd != d || rR != R)) {
      throw std::runtime_error("calibration table mixes (d, R)");
    }
    d = rd;
    R = rR;
    Row row;
    row.r = std::stoi(f[2]);
    row.estimate = std::stod(f[3]);
    row.n = std::stoull(f[4]);
    row.ci_hi = f.size() > 5 ? std::stod(f[5]) : row.estimate;
    rows.push_back(row);
  }
  if (!header) throw std::runtime_error("missing calibration header");
  return RemeetTable(d, R, std::move(rows));
}

RemeetTable calibrate_remeet(int d, int R, std::span<const int> radii,
                             std::uint64_t n, const TruncationPolicy& policy,
                             std::uint64_t seed, const ParallelMap& pool) {
  std::vector<RemeetTable::Row> rows;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const int r = radii[k];
    const auto est = estimate_h(Point::zero(d), Point::unit(d, 0, r), R, n,
                                policy, derive_seed(seed, k), pool);
    rows.push_back({r, est.estimate.estimate, est.estimate.ci_hi, n});
  }
  return RemeetTable(d, R, std::move(rows));
}

Point canonical_difference(const Point& w) {
  std::vector<int> c = w.coords();
  for (auto& v : c) v = std::abs(v);
  std::sort(c.begin(), c.end(), std::greater<>());
  return Point(c);
}

MeetingProbabilityCache::MeetingProbabilityCache(int d, int R, std::uint64_t n,
                                                 TruncationPolicy policy,
                                                 std::uint64_t seed,
                                                 int direct_radius,
                                                 const ParallelMap& pool)
    : d_(d),
      R_(R),
      n_(n),
      policy_(policy),
      seed_(seed),
      direct_radius_(direct_radius),
      pool_(&pool) {
  if (direct_radius < 1) throw std::invalid_argument("direct radius must be >= 1");
}

HBounds MeetingProbabilityCache::estimate_class(const Point& canon) {
  const auto est = estimate_h(Point::zero(d_), canon, R_, n_, policy_,
                              derive_seed(seed_, pack_key(canon)), *pool_);
  return {est.estimate.estimate, est.estimate.ci_lo, est.estimate.ci_hi};
}

std::size_t MeetingProbabilityCache::classes_estimated() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

void MeetingProbabilityCache::prefetch(std::span<const Point> diffs) {
  std::vector<Point> todo;
  {
    std::lock_guard lock(mutex_);
    for (const auto& w : diffs) {
      if (linf_norm(w) == 0 || linf_norm(w) > direct_radius_) continue;
      const Point c = canonical_difference(w);
      if (!cache_.count(c) &&
          std::find(todo.begin(), todo.end(), c) == todo.end()) {
        todo.push_back(c);
      }
    }
  }
  std::sort(todo.begin(), todo.end());
  std::vector<HBounds> results(todo.size());
  // Replicates inside each class already run on the pool; classes are
  // processed in order.
  for (std::size_t i = 0; i < todo.size(); ++i) results[i] = estimate_class(todo[i]);
  std::lock_guard lock(mutex_);
  for (std::size_t i = 0; i < todo.size(); ++i) cache_.emplace(todo[i], results[i]);
}

void MeetingProbabilityCache::ensure_tail() {
  std::lock_guard tail_lock(tail_mutex_);
  if (tail_ready_) return;
  // All canonical classes with 0 < |w| <= direct_radius.
  std::vector<Point> classes;
  std::vector<int> c(static_cast<std::size_t>(d_), 0);
  auto rec = [&](auto&& self, int axis, int bound) -> void {
    if (axis == d_) {
      if (c[0] > 0) classes.push_back(Point(c));
      return;
    }
    for (int v = 0; v <= bound; ++v) {
      c[static_cast<std::size_t>(axis)] = v;
      self(self, axis + 1, v);
    }
  };
  rec(rec, 0, direct_radius_);
  prefetch(classes);
  std::lock_guard lock(mutex_);
  double fp = 0.0, fh = 0.0;
  for (const auto& cls : classes) {
    const auto& b = cache_.at(cls);
    const double s = std::pow(static_cast<double>(linf_norm(cls)), d_ - 2);
    fp = std::max(fp, b.point * s);
    fh = std::max(fh, b.hi * s);
  }
  tail_point_ = fp;
  tail_hi_ = fh;
  tail_ready_ = true;
}

HBounds MeetingProbabilityCache::at(const Point& w) {
  const long r = linf_norm(w);
  if (r == 0) throw std::invalid_argument("meeting probability needs w != 0");
  if (r <= direct_radius_) {
    const Point c = canonical_difference(w);
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(c);
      if (it != cache_.end()) return it->second;
    }
    const HBounds b = estimate_class(c);
    std::lock_guard lock(mutex_);
    cache_.emplace(c, b);
    return b;
  }
  ensure_tail();
  const double s = std::pow(static_cast<double>(r), 2 - d_);
  return {tail_point_ * s, 0.0, tail_hi_ * s};
}

}  // namespace voterperc
