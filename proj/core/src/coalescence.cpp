#include "voterperc/coalescence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace voterperc {

MarkedPartition::MarkedPartition(std::vector<Point> ground)
    : ground_(std::move(ground)) {
  const auto n = ground_.size();
  if (n >= kNone) throw std::invalid_argument("ground set too large");
  lookup_.reserve(n * 2);
  list_of_.resize(n);
  lists_.resize(n);
  list_mark_.resize(n);
  mark_list_.resize(n);
  for (Index i = 0; i < n; ++i) {
    if (i && ground_[i].dim() != ground_[0].dim()) {
      throw std::invalid_argument("ground set mixes dimensions");
    }
    if (!lookup_.emplace(ground_[i], i).second) {
      throw std::invalid_argument("ground set has duplicate point " +
                                  ground_[i].to_string());
    }
    list_of_[i] = i;
    lists_[i] = {i};
    list_mark_[i] = i;
    mark_list_[i] = i;
  }
  marks_ = n;
}

MarkedPartition::Index MarkedPartition::index_of(const Point& p) const {
  auto it = lookup_.find(p);
  return it == lookup_.end() ? kNone : it->second;
}

std::size_t MarkedPartition::block_size(Index mark) const {
  if (!is_mark(mark)) throw std::invalid_argument("not a mark");
  return lists_[mark_list_[mark]].size();
}

std::span<const MarkedPartition::Index> MarkedPartition::block(Index mark) const {
  if (!is_mark(mark)) throw std::invalid_argument("not a mark");
  return lists_[mark_list_[mark]];
}

std::vector<MarkedPartition::Index> MarkedPartition::marks() const {
  std::vector<Index> out;
  out.reserve(marks_);
  for (Index i = 0; i < ground_.size(); ++i) {
    if (mark_list_[i] != kNone) out.push_back(i);
  }
  return out;
}

std::vector<MarkedPartition::Index> MarkedPartition::odd_marks() const {
  std::vector<Index> out;
  for (Index i = 0; i < ground_.size(); ++i) {
    if (mark_list_[i] != kNone && lists_[mark_list_[i]].size() % 2 == 1) {
      out.push_back(i);
    }
  }
  return out;
}

MarkedPartition::MergeOutcome MarkedPartition::merge(Index x, Index y) {
  if (x >= size() || y >= size()) throw std::invalid_argument("index out of range");
  if (x == y) throw std::invalid_argument("cannot merge a block with itself");
  if (!is_mark(x) || !is_mark(y)) {
    throw std::invalid_argument("merge needs two marks, got " +
                                ground_[x].to_string() + " and " +
                                ground_[y].to_string());
  }
  const Index lx = mark_list_[x];
  const Index ly = mark_list_[y];
  const bool odd_x = lists_[lx].size() % 2 == 1;
  const bool odd_y = lists_[ly].size() % 2 == 1;
  MergeOutcome out;
  out.both_odd = odd_x && odd_y;
  if (odd_x != odd_y) {
    out.survivor = odd_x ? x : y;
  } else {
    out.survivor = ground_[x] < ground_[y] ? x : y;
  }
  out.absorbed = out.survivor == x ? y : x;

  // Move the smaller member list into the larger one.
  Index big = lx, small = ly;
  if (lists_[big].size() < lists_[small].size()) std::swap(big, small);
  for (Index v : lists_[small]) list_of_[v] = big;
  lists_[big].insert(lists_[big].end(), lists_[small].begin(), lists_[small].end());
  lists_[small].clear();
  lists_[small].shrink_to_fit();
  list_mark_[big] = out.survivor;
  list_mark_[small] = kNone;
  mark_list_[out.survivor] = big;
  mark_list_[out.absorbed] = kNone;
  --marks_;
  return out;
}

bool MarkedPartition::valid() const {
  std::vector<int> seen(size(), 0);
  std::size_t mark_count = 0;
  for (Index m = 0; m < size(); ++m) {
    if (mark_list_[m] == kNone) continue;
    ++mark_count;
    const auto& members = lists_[mark_list_[m]];
    if (list_mark_[mark_list_[m]] != m) return false;
    if (std::find(members.begin(), members.end(), m) == members.end()) return false;
    for (Index v : members) {
      if (seen[v]++) return false;
      if (label(v) != m) return false;
    }
  }
  if (mark_count != marks_) return false;
  for (Index v = 0; v < size(); ++v) {
    if (seen[v] != 1) return false;
  }
  return true;
}

MarkedPartition merge_blocks(const MarkedPartition& pi, const Point& x,
                             const Point& y) {
  const auto ix = pi.index_of(x);
  const auto iy = pi.index_of(y);
  if (ix == MarkedPartition::kNone || iy == MarkedPartition::kNone) {
    throw std::invalid_argument("point not in ground set");
  }
  MarkedPartition out = pi;
  out.merge(ix, iy);
  return out;
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kSingleBlock: return "single_block";
    case StopReason::kRemeetBound: return "remeet_bound";
    case StopReason::kEscaped: return "escaped";
    case StopReason::kHorizon: return "horizon";
  }
  return "unknown";
}

StoppingPolicy StoppingPolicy::at_time(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be >= 0");
  StoppingPolicy p;
  p.fixed_horizon = true;
  p.truncation.t_max = t;
  return p;
}

std::string StoppingPolicy::describe() const {
  std::ostringstream os;
  if (fixed_horizon) {
    os << "fixed_horizon;t=" << truncation.t_max;
    return os.str();
  }
  os << "eps_stop=" << eps_stop << (remeet ? "" : "(no table)") << ';'
     << truncation.describe();
  return os.str();
}

namespace {

// Global audit counters. Atomic so concurrent runs can report.
std::atomic<std::uint64_t> g_audit_runs{0};
std::atomic<std::uint64_t> g_audit_violations{0};

long ground_diameter(std::span<const Point> A) {
  const int d = A.front().dim();
  long diam = 0;
  for (int i = 0; i < d; ++i) {
    int lo = A.front()[i], hi = lo;
    for (const auto& p : A) {
      lo = std::min(lo, p[i]);
      hi = std::max(hi, p[i]);
    }
    diam = std::max<long>(diam, hi - lo);
  }
  return diam;
}

}  // namespace

CoalescenceRun run_coalescence(std::span<const Point> A, int R,
                               const StoppingPolicy& policy, Rng& rng) {
  if (A.empty()) throw std::invalid_argument("coalescence needs a nonempty set");
  CoalescenceRun run;
  run.ground.assign(A.begin(), A.end());
  run.R = R;
  run.policy = policy;
  MarkedPartition pi(run.ground);  // validates distinctness

  auto kernel = std::make_shared<const JumpKernel>(A.front().dim(), R);
  WalkSystem sys(kernel, A, std::move(rng));
  const double horizon = policy.truncation.t_max;
  const double escape =
      policy.truncation.effective_escape(ground_diameter(A), R);
  const bool pairwise_rules = !policy.fixed_horizon;
  double next_check = policy.check_interval;

  auto all_escaped = [&] {
    const auto ids = sys.alive_ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        if (static_cast<double>(linf_dist(sys.position(ids[i]),
                                          sys.position(ids[j]))) <= escape) {
          return false;
        }
      }
    }
    return true;
  };
  auto moved_is_isolated = [&](WalkerId moved) {
    const Point& p = sys.position(moved);
    for (WalkerId w : sys.alive_ids()) {
      if (w != moved && static_cast<double>(linf_dist(p, sys.position(w))) <= escape) {
        return false;
      }
    }
    return true;
  };
  auto remeet_sum = [&] {
    const auto ids = sys.alive_ids();
    double s = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        s += policy.remeet->q(static_cast<double>(
            linf_dist(sys.position(ids[i]), sys.position(ids[j]))));
      }
    }
    return s;
  };

  bool stopped = sys.alive_count() == 1;
  if (stopped) run.reason = StopReason::kSingleBlock;
  while (!stopped) {
    auto ev = sys.advance_until(horizon);
    if (!ev) {
      run.reason = StopReason::kHorizon;
      break;
    }
    if (ev->has_coincidence()) {
      const auto outcome = pi.merge(ev->walker, ev->coincident);
      run.merges.push_back({ev->time, ev->walker, ev->coincident,
                            outcome.survivor, outcome.both_odd, ev->to});
      if (outcome.both_odd) {
        auto a = outcome.survivor, b = outcome.absorbed;
        if (run.ground[b] < run.ground[a]) std::swap(a, b);
        run.annihilations.emplace_back(a, b);
      }
      sys.kill(outcome.absorbed);
      if (sys.alive_count() == 1) {
        run.reason = StopReason::kSingleBlock;
        break;
      }
    }
    if (!pairwise_rules || sys.alive_count() > policy.max_pairwise_check) continue;
    const WalkerId moved = sys.alive(ev->walker) ? ev->walker : ev->coincident;
    if (moved_is_isolated(moved) && all_escaped()) {
      run.reason = StopReason::kEscaped;
      break;
    }
    if (policy.remeet && sys.time() >= next_check) {
      next_check = sys.time() + policy.check_interval;
      run.residual_bound = remeet_sum();
      if (run.residual_bound < policy.eps_stop) {
        run.reason = StopReason::kRemeetBound;
        break;
      }
    }
  }
  run.stop_time = sys.time();
  run.positions.resize(run.ground.size());
  for (MarkedPartition::Index v = 0; v < run.ground.size(); ++v) {
    run.positions[v] = sys.position(pi.label(v));
  }
  run.terminal = std::move(pi);
  rng = std::move(sys.rng());
  audit_coupling(run);
  return run;
}

AnnihilatingView annihilating_view(const CoalescenceRun& run, double t) {
  AnnihilatingView view;
  view.time = t;
  if (t >= run.stop_time) {
    view.odd_marks = run.terminal.odd_marks();
    for (auto m : view.odd_marks) view.positions.push_back(run.positions[m]);
    return view;
  }
  MarkedPartition pi(run.ground);
  for (const auto& ev : run.merges) {
    if (ev.time > t) break;
    pi.merge(ev.a, ev.b);
  }
  view.odd_marks = pi.odd_marks();
  return view;
}

bool audit_coupling(const CoalescenceRun& run) {
  const auto& pi = run.terminal;
  const auto odd = pi.odd_marks();
  bool ok = pi.valid();
  for (auto m : odd) ok = ok && pi.is_mark(m);
  const std::size_t removed = run.ground.size() - odd.size();
  ok = ok && removed % 2 == 0;
  ok = ok && run.annihilations.size() * 2 == removed;
  for (const auto& [a, b] : run.annihilations) {
    ok = ok && run.ground[a] < run.ground[b];
  }
  g_audit_runs.fetch_add(1, std::memory_order_relaxed);
  if (!ok) g_audit_violations.fetch_add(1, std::memory_order_relaxed);
  return ok;
}

CouplingAuditSnapshot coupling_audit() {
  return {g_audit_runs.load(), g_audit_violations.load()};
}

void reset_coupling_audit() {
  g_audit_runs = 0;
  g_audit_violations = 0;
}

}  // namespace voterperc
