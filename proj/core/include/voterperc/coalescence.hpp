#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "voterperc/lattice.hpp"
#include "voterperc/rng.hpp"
#include "voterperc/walks.hpp"

namespace voterperc {

// A partition of a finite ground set A into blocks, each with one marked
// vertex; l(x) is the mark of x's block and l(m) = m for marks. Vertices are
// addressed by their index in the ground set.
class MarkedPartition {
 public:
  using Index = std::uint32_t;
  static constexpr Index kNone = std::numeric_limits<Index>::max();

  struct MergeOutcome {
    Index survivor = kNone;
    Index absorbed = kNone;
    bool both_odd = false;
  };

  MarkedPartition() = default;
  // The trivial partition: every vertex is its own marked block.
  explicit MarkedPartition(std::vector<Point> ground);

  std::size_t size() const { return ground_.size(); }
  const std::vector<Point>& ground() const { return ground_; }
  const Point& point(Index i) const { return ground_.at(i); }
  Index index_of(const Point& p) const;  // kNone if absent

  bool is_mark(Index i) const { return mark_list_.at(i) != kNone; }
  Index label(Index i) const { return list_mark_[list_of_.at(i)]; }
  std::size_t block_size(Index mark) const;
  std::span<const Index> block(Index mark) const;
  std::size_t mark_count() const { return marks_; }
  std::vector<Index> marks() const;
  // Marks whose block has odd cardinality.
  std::vector<Index> odd_marks() const;

  // Merges the blocks of distinct marks x and y. With blocks of different
  // parity the odd block's mark survives; otherwise the smaller point under
  // the well-ordering survives. Throws std::invalid_argument if x or y is
  // not a mark or x == y.
  MergeOutcome merge(Index x, Index y);

  // Blocks are disjoint, cover A, and contain their marks, and every mark is
  // a fixed point of the label map.
  bool valid() const;

 private:
  std::vector<Point> ground_;
  std::unordered_map<Point, Index, PointHash> lookup_;
  std::vector<Index> list_of_;                  // vertex -> member list id
  std::vector<std::vector<Index>> lists_;       // member lists
  std::vector<Index> list_mark_;                // list id -> mark
  std::vector<Index> mark_list_;                // vertex -> list id if a mark
  std::size_t marks_ = 0;
};

// Value-style merge by points.
MarkedPartition merge_blocks(const MarkedPartition& pi, const Point& x,
                             const Point& y);

enum class StopReason {
  kSingleBlock,   // one mark left: no further merges are possible
  kRemeetBound,   // sum over mark pairs of q(distance) fell below eps_stop
  kEscaped,       // every pair of marks is farther apart than the escape radius
  kHorizon,       // time limit reached
};
std::string to_string(StopReason r);

// How a coalescence run approximates t -> infinity. The exact terminal
// partition is reached only with kSingleBlock; the remaining rules truncate
// and can only miss merges.
struct StoppingPolicy {
  double eps_stop = 1e-3;
  // Enables the eps_stop rule when set.
  std::shared_ptr<const RemeetTable> remeet;
  // Escape rule (radius computed from the ground-set diameter) and t_max.
  TruncationPolicy truncation;
  double check_interval = 1.0;
  // The pairwise rules are only evaluated once this few marks remain.
  std::size_t max_pairwise_check = 64;
  // When set, t_max is an exact horizon: only escape/remeet rules are off and
  // the run is the coalescing system at time t_max.
  bool fixed_horizon = false;

  static StoppingPolicy at_time(double t);
  std::string describe() const;
};

struct MergeEvent {
  double time = 0.0;
  MarkedPartition::Index a = 0;  // jumping mark
  MarkedPartition::Index b = 0;  // mark already at the site
  MarkedPartition::Index survivor = 0;
  bool both_odd = false;
  Point site;
};

struct CoalescenceRun {
  std::vector<Point> ground;
  int R = 0;
  StoppingPolicy policy;
  StopReason reason = StopReason::kHorizon;
  double stop_time = 0.0;
  // Sum over surviving mark pairs of q(distance) when last evaluated; NaN if
  // the remeet rule was never evaluated.
  double residual_bound = std::numeric_limits<double>::quiet_NaN();
  std::vector<MergeEvent> merges;
  MarkedPartition terminal;
  // Pairs (x, y), x before y in the well-ordering, with eta_{x,y} = 1: two
  // odd blocks with these marks merged.
  std::vector<std::pair<MarkedPartition::Index, MarkedPartition::Index>>
      annihilations;
  // Walker position of every vertex at stop_time (that of its block's mark).
  std::vector<Point> positions;

  std::size_t merged_away() const { return ground.size() - terminal.mark_count(); }
};

// Simulates independent walks from A, merging blocks whenever two marked
// walkers coincide; blocks ride along with their mark's walker. Requires A
// nonempty with pairwise distinct points of one dimension.
CoalescenceRun run_coalescence(std::span<const Point> A, int R,
                               const StoppingPolicy& policy, Rng& rng);

struct AnnihilatingView {
  double time = 0.0;
  std::vector<MarkedPartition::Index> odd_marks;
  std::vector<Point> positions;  // of the odd marks' walkers at `time`, if known
};

// Odd-cardinality marks at time t (t = +infinity or t >= stop_time gives the
// terminal view). Positions are filled only for the terminal view.
AnnihilatingView annihilating_view(const CoalescenceRun& run, double t);

// Inline audit of the coupling identities, run on every coalescence:
// odd marks are marks, |A \ odd marks| is even, and the number of
// annihilating pairs equals |A \ odd marks| / 2.
struct CouplingAuditSnapshot {
  std::uint64_t runs = 0;
  std::uint64_t violations = 0;
};
CouplingAuditSnapshot coupling_audit();
void reset_coupling_audit();
// Returns true when the identities hold; failures are also counted.
bool audit_coupling(const CoalescenceRun& run);

}  // namespace voterperc
