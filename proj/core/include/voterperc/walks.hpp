#pragma once

#include <absl/container/flat_hash_map.h>

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "voterperc/lattice.hpp"
#include "voterperc/parallel.hpp"
#include "voterperc/rng.hpp"
#include "voterperc/stats.hpp"

namespace voterperc {

// Displacements of one R-spread-out jump: B_1(R) minus the origin, each
// equally likely.
class JumpKernel {
 public:
  JumpKernel(int d, int R);

  int dim() const { return d_; }
  int range() const { return R_; }
  std::span<const Point> offsets() const { return offsets_; }
  const Point& sample(Rng& rng) const {
    return offsets_[uniform_below(rng, offsets_.size())];
  }

 private:
  int d_;
  int R_;
  std::vector<Point> offsets_;
};

using WalkerId = std::uint32_t;
inline constexpr WalkerId kNoWalker = std::numeric_limits<WalkerId>::max();

struct WalkEvent {
  double time = 0.0;
  WalkerId walker = kNoWalker;
  Point from;
  Point to;
  // Some other alive walker sharing `to` after the jump, if any.
  WalkerId coincident = kNoWalker;
  bool has_coincidence() const { return coincident != kNoWalker; }
};

// Independent continuous-time R-spread-out walks with rate-1 clocks, driven
// as one exponential race. Walkers can be removed (killed); only alive
// walkers ring. Positions are indexed so that coincidences are found in
// O(1) per jump.
class WalkSystem {
 public:
  WalkSystem(int R, std::span<const Point> starts, Rng rng);
  WalkSystem(std::shared_ptr<const JumpKernel> kernel,
             std::span<const Point> starts, Rng rng);

  double time() const { return time_; }
  int range() const { return kernel_->range(); }
  std::size_t size() const { return positions_.size(); }
  std::size_t alive_count() const { return alive_.size(); }
  bool alive(WalkerId id) const;
  const Point& position(WalkerId id) const { return positions_.at(id); }
  std::span<const WalkerId> alive_ids() const { return alive_; }
  Rng& rng() { return rng_; }

  // Moves `id` to a uniform site of B_1(x, R) \ {x} without advancing time.
  // Throws std::invalid_argument for a dead or unknown walker.
  WalkEvent step_walker(WalkerId id);

  // Advances time by an Exponential(alive_count) variable and jumps a
  // uniformly chosen alive walker. Throws std::logic_error when empty.
  WalkEvent advance_to_next_event();

  // As above, but if the next ring falls after `horizon` the clock is set to
  // `horizon` and nothing moves (memorylessness makes this exact).
  std::optional<WalkEvent> advance_until(double horizon);

  void kill(WalkerId id);

  // Some alive walker other than `exclude` at `site`, or kNoWalker.
  WalkerId occupant(const Point& site, WalkerId exclude = kNoWalker) const;

 private:
  static constexpr std::size_t kIndexThreshold = 16;

  WalkEvent jump(WalkerId id);
  void index_insert(WalkerId id);
  void index_remove(WalkerId id);

  std::shared_ptr<const JumpKernel> kernel_;
  Rng rng_;
  double time_ = 0.0;
  std::vector<Point> positions_;
  std::vector<WalkerId> alive_;
  std::vector<std::uint32_t> slot_;  // position of each walker in alive_
  bool indexed_ = false;
  absl::flat_hash_map<std::uint64_t, WalkerId> head_;
  std::vector<WalkerId> next_at_site_;
};

// When to give up on "ever meet": the pair separation exceeds the escape
// radius, or the elapsed time exceeds t_max. With escape_radius = 0 the
// radius is escape_factor * max(|x - y|, R), which keeps the relative
// truncation error roughly constant across starting distances and ranges.
struct TruncationPolicy {
  double escape_radius = 0.0;
  double escape_factor = 8.0;
  double t_max = 1.0e6;

  double effective_escape(long separation, int R) const;
  std::string describe() const;
};

struct MeetEstimate {
  EstimateWithCI estimate;
  std::uint64_t met = 0;
  std::uint64_t escaped = 0;
  std::uint64_t timed_out = 0;
  TruncationPolicy policy;
  // Truncation only ever drops meetings, so the estimate is biased downward.
  static constexpr const char* kBias = "downward";
};

// Outcome of one replicate of two independent walks started at x and y.
enum class PairOutcome { kMet, kEscaped, kTimedOut };
PairOutcome simulate_pair(const Point& x, const Point& y,
                          const std::shared_ptr<const JumpKernel>& kernel,
                          const TruncationPolicy& policy, Rng& rng);

// Fraction of replicates in which the walks from x and y meet before the
// policy fires. Requires x != y and n >= 1.
MeetEstimate estimate_h(const Point& x, const Point& y, int R, std::uint64_t n,
                        const TruncationPolicy& policy, std::uint64_t seed,
                        const ParallelMap& pool = serial_map(),
                        double level = kDefaultLevel);

struct FEstimate {
  struct Entry {
    Point x;
    Point y;
    MeetEstimate h;
    double scaled = 0.0;     // h * |x-y|^(d-2)
    double scaled_hi = 0.0;  // upper CI * |x-y|^(d-2)
  };
  double value = 0.0;  // max of scaled
  double upper = 0.0;  // max of scaled_hi
  double lower = 0.0;  // max of the lower CI, scaled
  std::vector<Entry> entries;
};

// Empirical stand-in for f(R): max over pairs of h_R(x,y) |x-y|^(d-2).
FEstimate estimate_fR(int R, int d,
                      std::span<const std::pair<Point, Point>> pairs,
                      std::uint64_t n, const TruncationPolicy& policy,
                      std::uint64_t seed, const ParallelMap& pool = serial_map());

// Re-meeting probability q(r) from l-infinity distance r along an axis, used
// for stopping coalescence and choosing escape radii.
class RemeetTable {
 public:
  struct Row {
    int r = 0;
    double estimate = 0.0;
    double ci_hi = 0.0;
    std::uint64_t n = 0;
  };

  RemeetTable() = default;
  RemeetTable(int d, int R, std::vector<Row> rows);

  int dim() const { return d_; }
  int range() const { return R_; }
  const std::vector<Row>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  // Log-log interpolation inside the table, c * r^(2-d) beyond it, and the
  // first row's value below it. Uses the upper confidence bounds.
  double q(double r) const;
  // Smallest integer r with q(r) < eps.
  long escape_radius_for(double eps) const;

  std::string to_csv() const;
  static RemeetTable from_csv(const std::string& text);

 private:
  int d_ = 0;
  int R_ = 0;
  std::vector<Row> rows_;
};

RemeetTable calibrate_remeet(int d, int R, std::span<const int> radii,
                             std::uint64_t n, const TruncationPolicy& policy,
                             std::uint64_t seed,
                             const ParallelMap& pool = serial_map());

// Canonical representative of the difference class of w under coordinate
// permutations and sign flips (absolute values, sorted descending). The
// jump law is invariant under these symmetries, hence so is h_R.
Point canonical_difference(const Point& w);

struct HBounds {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Lazily estimated h_R(0, w) per canonical class for |w| <= direct_radius.
// Farther pairs use the bound shape h <= f * |w|^(2-d) with f taken from the
// estimated classes: hi = f_hi |w|^(2-d), point = f |w|^(2-d), lo = 0.
// Each class draws from a stream keyed by the class, so results do not
// depend on query order. Thread-safe.
class MeetingProbabilityCache {
 public:
  MeetingProbabilityCache(int d, int R, std::uint64_t n,
                          TruncationPolicy policy, std::uint64_t seed,
                          int direct_radius = 6,
                          const ParallelMap& pool = serial_map());

  HBounds at(const Point& w);
  // Estimates all listed classes up front, in parallel.
  void prefetch(std::span<const Point> diffs);
  int direct_radius() const { return direct_radius_; }
  std::size_t classes_estimated() const;

 private:
  HBounds estimate_class(const Point& canon);
  void ensure_tail();

  int d_;
  int R_;
  std::uint64_t n_;
  TruncationPolicy policy_;
  std::uint64_t seed_;
  int direct_radius_;
  const ParallelMap* pool_;
  mutable std::mutex mutex_;
  std::mutex tail_mutex_;
  std::map<Point, HBounds> cache_;
  bool tail_ready_ = false;
  double tail_point_ = 0.0;
  double tail_hi_ = 0.0;
};

}  // namespace voterperc
