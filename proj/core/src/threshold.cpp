#include "voterperc/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "voterperc/io.hpp"

namespace voterperc {

AnnulusSpec AnnulusSpec::from_box(int d, long box) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (box < 4 || box % 2 != 0) {
    throw std::invalid_argument("box must be even and >= 4, got " + std::to_string(box));
  }
  return {d, box / 2};
}

BoxSpec AnnulusSpec::window() const {
  return linf_box(Point::zero(d), static_cast<int>(outer()));
}

CrossingQuery AnnulusSpec::query() const {
  return CrossingQuery::annulus(Point::zero(d), inner(), outer());
}

FieldSample field_at(const CoupledSample& s, const AnnulusSpec& a, double alpha) {
  std::vector<std::uint8_t> v(s.block.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s.u[s.block[i]] < alpha ? 1 : 0;
  return FieldSample::on_box(a.window(), std::move(v));
}

namespace {

// Row-major indexing of the window with the last coordinate fastest, which
// matches BoxSpec::points().
struct WindowGeometry {
  int d = 0;
  long side = 0;
  std::vector<long> stride;
  std::vector<std::uint8_t> touches;  // bit 0: next to inner, bit 1: next to outer

  explicit WindowGeometry(const AnnulusSpec& a) : d(a.d), side(2 * a.outer() + 1) {
    stride.assign(d, 1);
    for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * side;
    const CrossingQuery q = a.query();
    const auto offsets = neighbor_offsets(d, q.adjacency);
    const auto pts = a.window().points();
    touches.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (const auto& o : offsets) {
        const Point y = pts[i] + o;
        if (q.inner.contains(y)) touches[i] |= 1;
        if (q.outer.contains(y)) touches[i] |= 2;
      }
    }
  }
};

const WindowGeometry& geometry_for(const AnnulusSpec& a) {
  thread_local std::unique_ptr<WindowGeometry> cached;
  thread_local long cached_L = -1;
  if (!cached || cached->d != a.d || cached_L != a.L) {
    cached = std::make_unique<WindowGeometry>(a);
    cached_L = a.L;
  }
  return *cached;
}

}  // namespace

double critical_alpha(const CoupledSample& s, const AnnulusSpec& a) {
  const WindowGeometry& g = geometry_for(a);
  const std::size_t n = g.touches.size();
  if (s.block.size() != n) throw std::invalid_argument("coupled sample does not match the window");
  const std::size_t nb = s.u.size();

  std::vector<std::uint32_t> start(nb + 1, 0);
  for (auto b : s.block) ++start[b + 1];
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<std::uint32_t> members(n);
  {
    auto fill = start;
    for (std::uint32_t i = 0; i < n; ++i) members[fill[s.block[i]]++] = i;
  }
  std::vector<std::uint32_t> order(nb);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
    return s.u[x] < s.u[y] || (s.u[x] == s.u[y] && x < y);
  });

  const auto source = static_cast<std::uint32_t>(n);
  const auto sink = source + 1;
  UnionFind uf(n + 2);
  std::vector<std::uint8_t> open(n, 0);
  for (auto b : order) {
    for (auto k = start[b]; k < start[b + 1]; ++k) {
      const std::uint32_t i = members[k];
      open[i] = 1;
      if (g.touches[i] & 1) uf.unite(i, source);
      if (g.touches[i] & 2) uf.unite(i, sink);
      for (int axis = 0; axis < g.d; ++axis) {
        const long c = (static_cast<long>(i) / g.stride[axis]) % g.side;
        if (c > 0 && open[i - g.stride[axis]]) {
          uf.unite(i, static_cast<std::uint32_t>(i - g.stride[axis]));
        }
        if (c + 1 < g.side && open[i + g.stride[axis]]) {
          uf.unite(i, static_cast<std::uint32_t>(i + g.stride[axis]));
        }
      }
    }
    if (uf.same(source, sink)) return s.u[b];
  }
  return std::numeric_limits<double>::infinity();
}

ThresholdSampler bernoulli_threshold_sampler(const AnnulusSpec& a) {
  auto pts = std::make_shared<const std::vector<Point>>(a.window().points());
  ThresholdSampler ts;
  ts.id = "bernoulli";
  ts.R = 0;
  ts.coupled = [pts](std::uint64_t seed) {
    Rng rng(seed);
    CoupledSample s;
    s.block.resize(pts->size());
    std::iota(s.block.begin(), s.block.end(), 0u);
    s.u.resize(pts->size());
    for (auto& u : s.u) u = uniform01(rng);
    return s;
  };
  ts.at_alpha = [pts](double alpha) { return bernoulli_sampler(*pts, alpha); };
  return ts;
}

ThresholdSampler mu_threshold_sampler(const AnnulusSpec& a, int R,
                                      const StoppingPolicy& policy) {
  auto pts = std::make_shared<const std::vector<Point>>(a.window().points());
  ThresholdSampler ts;
  ts.id = "mu_R" + std::to_string(R);
  ts.R = R;
  ts.coupled = [pts, R, policy](std::uint64_t seed) {
    Rng rng(seed);
    DualBlocks b = dual_blocks(*pts, R, policy, rng);
    CoupledSample s;
    s.block = std::move(b.block);
    s.u.resize(b.count);
    for (auto& u : s.u) u = uniform01(rng);
    return s;
  };
  ts.at_alpha = [pts, R, policy](double alpha) { return mu_sampler(*pts, alpha, R, policy); };
  return ts;
}

ThresholdSampler always_open_sampler(const AnnulusSpec& a) {
  const BoxSpec window = a.window();
  const std::size_t n = window.cardinality();
  ThresholdSampler ts;
  ts.id = "always_open";
  ts.coupled = [n](std::uint64_t) { return CoupledSample{std::vector<std::uint32_t>(n, 0), {-1.0}}; };
  ts.at_alpha = [window](double) {
    return FieldSampler([window](std::uint64_t) { return FieldSample::constant(window, 1); });
  };
  return ts;
}

std::string to_string(CurveMode m) {
  return m == CurveMode::kCoupled ? "coupled" : "independent";
}

namespace {

std::vector<double> draw_bank(const ThresholdSampler& sampler, const AnnulusSpec& a,
                              std::uint64_t from, std::uint64_t to, std::uint64_t seed,
                              const ParallelMap& pool) {
  std::vector<double> out(to - from);
  pool.for_each(out.size(), [&](std::size_t i) {
    out[i] = critical_alpha(sampler.coupled(derive_seed(seed, from + i)), a);
  });
  return out;
}

std::uint64_t count_below(const std::vector<double>& sorted, double alpha) {
  return static_cast<std::uint64_t>(
      std::lower_bound(sorted.begin(), sorted.end(), alpha) - sorted.begin());
}

}  // namespace

CrossingCurve crossing_curve(const ThresholdSampler& sampler, const AnnulusSpec& a,
                             std::span<const double> grid, std::uint64_t n,
                             std::uint64_t seed, CurveMode mode,
                             const ParallelMap& pool, double level) {
  if (grid.empty()) throw std::invalid_argument("empty alpha grid");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument("alpha grid must be sorted");
  }
  if (grid.front() < 0.0 || grid.back() > 1.0) {
    throw std::invalid_argument("alpha grid must lie in [0, 1]");
  }
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  CrossingCurve c;
  c.sampler_id = sampler.id;
  c.mode = mode;
  c.alpha.assign(grid.begin(), grid.end());
  if (mode == CurveMode::kCoupled) {
    auto bank = draw_bank(sampler, a, 0, n, seed, pool);
    std::sort(bank.begin(), bank.end());
    for (double x : grid) c.raw.push_back(proportion_estimate(count_below(bank, x), n, level));
  } else {
    const CrossingQuery q = a.query();
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const FieldSampler draw = sampler.at_alpha(grid[j]);
      const std::uint64_t seed_j = derive_seed(seed, j);
      const auto hits = pool.map_reduce(
          n, std::uint64_t{0},
          [&](std::size_t i) -> std::uint64_t {
            return crossing(draw(derive_seed(seed_j, i)), q) ? 1 : 0;
          },
          [](std::uint64_t& acc, std::uint64_t v) { acc += v; });
      c.raw.push_back(proportion_estimate(hits, n, level));
    }
  }
  std::vector<double> est;
  for (const auto& e : c.raw) est.push_back(e.estimate);
  c.isotonic = isotonic_regression(est);
  c.isotonic_adjusted = c.isotonic != est;
  for (std::size_t j = 0; j < c.raw.size() && !c.non_monotone; ++j) {
    for (std::size_t k = j + 1; k < c.raw.size(); ++k) {
      if (c.raw[j].ci_lo > c.raw[k].ci_hi) {
        c.non_monotone = true;
        break;
      }
    }
  }
  return c;
}

ThresholdEstimate estimate_threshold(const ThresholdSampler& sampler,
                                     const AnnulusSpec& a, double p_star,
                                     double tolerance,
                                     const ThresholdSchedule& schedule,
                                     std::uint64_t seed, const ParallelMap& pool,
                                     double level) {
  if (!(p_star > 0.0 && p_star < 1.0)) throw std::invalid_argument("p* must lie in (0, 1)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (schedule.n_initial < 1 || schedule.n_max < schedule.n_initial) {
    throw std::invalid_argument("need 1 <= n_initial <= n_max");
  }
  ThresholdEstimate est;
  est.sampler_id = sampler.id;
  est.R = sampler.R;
  est.box = a.box();
  est.p_star = p_star;

  std::vector<double> bank = draw_bank(sampler, a, 0, schedule.n_initial, seed, pool);
  const double resolution = std::min(1e-4, tolerance / 16.0);
  for (int round = 1;; ++round) {
    std::vector<double> sorted = bank;
    std::sort(sorted.begin(), sorted.end());
    const std::uint64_t n = sorted.size();
    auto step = [&](double alpha) {
      const std::uint64_t k = count_below(sorted, alpha);
      BisectionStep s{round, n, alpha, k, proportion_estimate(k, n, level)};
      est.trace.push_back(s);
      return s.p.estimate;
    };

    if (step(0.0) >= p_star) {
      est.pinned = "low";
      est.alpha_hat = 0.0;
    } else if (step(1.0) < p_star) {
      est.pinned = "high";
      est.alpha_hat = 1.0;
    } else {
      est.pinned = "none";
      double lo = 0.0, hi = 1.0;
      while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        (step(mid) < p_star ? lo : hi) = mid;
      }
      est.alpha_hat = 0.5 * (lo + hi);
    }

    // alpha is plausible when the Wilson interval of count_below(alpha) holds p*.
    std::uint64_t k_lo = 0;
    while (k_lo < n && wilson_interval(k_lo, n, level).hi < p_star) ++k_lo;
    std::uint64_t k_hi = n;
    while (k_hi > 0 && wilson_interval(k_hi, n, level).lo > p_star) --k_hi;
    est.ci_lo = k_lo == 0 ? 0.0 : sorted[k_lo - 1];
    est.ci_hi = k_hi == n ? 1.0 : sorted[k_hi];
    est.ci_lo = std::clamp(est.ci_lo, 0.0, 1.0);
    est.ci_hi = std::clamp(est.ci_hi, 0.0, 1.0);
    est.rounds = round;
    est.n_total = n;
    est.converged = est.ci_hi - est.ci_lo <= tolerance;
    if (est.converged || n >= schedule.n_max) break;
    const std::uint64_t next = std::min(2 * n, schedule.n_max);
    auto more = draw_bank(sampler, a, n, next, seed, pool);
    bank.insert(bank.end(), more.begin(), more.end());
  }
  return est;
}

Interval gap_interval(double a_lo, double a_hi, double b_lo, double b_hi) {
  const double lo = std::max(0.0, std::max(a_lo, b_lo) - std::min(a_hi, b_hi));
  const double hi = std::max(std::abs(a_hi - b_lo), std::abs(b_hi - a_lo));
  return {lo, hi};
}

TrendReport theorem_trend_report(int d, std::span<const int> R_list, long box,
                                 double p_star, double tolerance,
                                 const ThresholdSchedule& schedule,
                                 const StoppingPolicy& policy, std::uint64_t seed,
                                 const ParallelMap& pool, double level) {
  const AnnulusSpec a = AnnulusSpec::from_box(d, box);
  TrendReport rep;
  rep.d = d;
  rep.box = box;
  rep.p_star = p_star;
  rep.seed = seed;
  rep.pc = estimate_threshold(bernoulli_threshold_sampler(a), a, p_star, tolerance,
                              schedule, derive_seed(seed, 0), pool, level);
  for (int R : R_list) {
    if (R < 1) throw std::invalid_argument("R must be >= 1");
    TrendRow row;
    row.R = R;
    row.alpha_c = estimate_threshold(mu_threshold_sampler(a, R, policy), a, p_star,
                                     tolerance, schedule,
                                     derive_seed(seed, 1 + static_cast<std::uint64_t>(R)),
                                     pool, level);
    row.gap = std::abs(row.alpha_c.alpha_hat - rep.pc.alpha_hat);
    row.gap_range = gap_interval(row.alpha_c.ci_lo, row.alpha_c.ci_hi, rep.pc.ci_lo,
                                 rep.pc.ci_hi);
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

std::vector<std::string> with_finite_size_note(std::vector<std::string> comments,
                                               long box) {
  comments.push_back("finite-size estimator at box " + std::to_string(box) +
                     "; not an infinite-volume threshold");
  return comments;
}

}  // namespace

std::string trend_csv(const TrendReport& r, const std::vector<std::string>& comments) {
  CsvTable t;
  t.comments = with_finite_size_note(comments, r.box);
  t.header = {"d",     "R",      "box",      "p_star",   "alpha_c_hat", "ci_lo", "ci_hi",
              "pc_hat", "pc_ci_lo", "pc_ci_hi", "gap",     "n_total",     "seed"};
  for (const auto& row : r.rows) {
    t.add_row({std::to_string(r.d), std::to_string(row.R), std::to_string(r.box),
               format_double(r.p_star), format_double(row.alpha_c.alpha_hat),
               format_double(row.alpha_c.ci_lo), format_double(row.alpha_c.ci_hi),
               format_double(r.pc.alpha_hat), format_double(r.pc.ci_lo),
               format_double(r.pc.ci_hi), format_double(row.gap),
               std::to_string(row.alpha_c.n_total), std::to_string(r.seed)});
  }
  return t.to_string();
}

std::string curve_csv(const CrossingCurve& c, const std::vector<std::string>& comments) {
  CsvTable t;
  t.comments = comments;
  t.comments.push_back("sampler " + c.sampler_id + ", mode " + to_string(c.mode) +
                       (c.non_monotone ? ", raw curve non-monotone beyond noise" : "") +
                       (c.isotonic_adjusted ? ", isotonic fit adjusted the raw curve" : ""));
  t.header = {"alpha", "estimate", "stderr", "ci_lo", "ci_hi", "n", "isotonic"};
  for (std::size_t j = 0; j < c.alpha.size(); ++j) {
    std::vector<std::string> row{format_double(c.alpha[j])};
    for (auto& s : estimate_columns(c.raw[j])) row.push_back(std::move(s));
    row.push_back(format_double(c.isotonic[j]));
    t.add_row(std::move(row));
  }
  return t.to_string();
}

std::string trace_csv(const ThresholdEstimate& e, const std::vector<std::string>& comments) {
  CsvTable t;
  t.comments = with_finite_size_note(comments, e.box);
  t.comments.push_back("sampler " + e.sampler_id + ", alpha_hat " +
                       format_double(e.alpha_hat) + " [" + format_double(e.ci_lo) + ", " +
                       format_double(e.ci_hi) + "], pinned " + e.pinned);
  t.header = {"round", "n", "alpha", "crossings", "estimate", "ci_lo", "ci_hi"};
  for (const auto& s : e.trace) {
    t.add_row({std::to_string(s.round), std::to_string(s.n), format_double(s.alpha),
               std::to_string(s.crossings), format_double(s.p.estimate),
               format_double(s.p.ci_lo), format_double(s.p.ci_hi)});
  }
  return t.to_string();
}

}  // namespace voterperc
