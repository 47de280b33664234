#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "voterperc/coalescence.hpp"
#include "voterperc/lattice.hpp"
#include "voterperc/measure.hpp"
#include "voterperc/parallel.hpp"
#include "voterperc/percolation.hpp"
#include "voterperc/stats.hpp"

namespace voterperc {

// The annulus event B(L-1) <-> B(2L)^c for nearest-neighbour open paths,
// observed on the window B(2L). The box size is 2L.
struct AnnulusSpec {
  int d = 3;
  long L = 8;

  // box must be even and >= 4.
  static AnnulusSpec from_box(int d, long box);
  long box() const { return 2 * L; }
  long inner() const { return L - 1; }
  long outer() const { return 2 * L; }
  BoxSpec window() const;
  CrossingQuery query() const;
};

// One draw of the monotone coupling over alpha: window site i (in
// window().points() order) is open at alpha iff u[block[i]] < alpha.
struct CoupledSample {
  std::vector<std::uint32_t> block;
  std::vector<double> u;
};

// The configuration of a coupled sample at alpha.
FieldSample field_at(const CoupledSample& s, const AnnulusSpec& a, double alpha);

// The smallest alpha* such that the annulus is crossed for every alpha >
// alpha*, found by adding blocks in increasing u order (Newman-Ziff with a
// virtual source and sink). +infinity if the fully open window does not cross.
double critical_alpha(const CoupledSample& s, const AnnulusSpec& a);

// A sampler usable both in coupled form and at a fixed alpha. For the
// stationary and product samplers, at_alpha(alpha)(seed) is the field of
// coupled(seed) at alpha, draw for draw.
struct ThresholdSampler {
  std::string id;
  int R = 0;  // 0 for the product measure
  std::function<CoupledSample(std::uint64_t seed)> coupled;
  std::function<FieldSampler(double alpha)> at_alpha;
};

ThresholdSampler bernoulli_threshold_sampler(const AnnulusSpec& a);
ThresholdSampler mu_threshold_sampler(const AnnulusSpec& a, int R,
                                      const StoppingPolicy& policy);
// Every site open at every alpha >= 0.
ThresholdSampler always_open_sampler(const AnnulusSpec& a);

enum class CurveMode {
  kCoupled,      // one bank of coupled samples shared by all grid points
  kIndependent,  // fresh samples per grid point, crossing tested directly
};
std::string to_string(CurveMode m);

struct CrossingCurve {
  std::string sampler_id;
  CurveMode mode = CurveMode::kCoupled;
  std::vector<double> alpha;
  std::vector<EstimateWithCI> raw;
  std::vector<double> isotonic;
  // Some pair j < k has raw[j].ci_lo > raw[k].ci_hi.
  bool non_monotone = false;
  // isotonic differs from the raw estimates.
  bool isotonic_adjusted = false;
};

// Requires a sorted grid inside [0, 1] (std::invalid_argument otherwise).
// Coupled replicate i uses seed derive_seed(seed, i); independent grid point
// j, replicate i uses derive_seed(derive_seed(seed, j), i).
CrossingCurve crossing_curve(const ThresholdSampler& sampler,
                             const AnnulusSpec& a, std::span<const double> grid,
                             std::uint64_t n, std::uint64_t seed,
                             CurveMode mode = CurveMode::kCoupled,
                             const ParallelMap& pool = serial_map(),
                             double level = kDefaultLevel);

struct BisectionStep {
  int round = 0;
  std::uint64_t n = 0;
  double alpha = 0.0;
  std::uint64_t crossings = 0;
  EstimateWithCI p;
};

struct ThresholdSchedule {
  std::uint64_t n_initial = 2000;
  std::uint64_t n_max = 16000;
};

struct ThresholdEstimate {
  std::string sampler_id;
  int R = 0;
  long box = 0;
  double p_star = 0.5;
  double alpha_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  std::uint64_t n_total = 0;
  int rounds = 0;
  // "none", "low" (the curve is >= p* at alpha = 0) or "high".
  std::string pinned = "none";
  bool converged = false;  // ci_hi - ci_lo <= tolerance
  std::vector<BisectionStep> trace;
};

// Bisection for the alpha where the crossing probability passes p*, on a
// bank of coupled samples. The interval is the set of alpha whose Wilson
// interval contains p*; the bank is doubled until it is narrower than
// `tolerance` or n_max is reached. Throws std::invalid_argument for p*
// outside (0, 1).
ThresholdEstimate estimate_threshold(const ThresholdSampler& sampler,
                                     const AnnulusSpec& a, double p_star,
                                     double tolerance,
                                     const ThresholdSchedule& schedule,
                                     std::uint64_t seed,
                                     const ParallelMap& pool = serial_map(),
                                     double level = kDefaultLevel);

// The distance between two intervals and the largest distance between their
// points: the range of |x - y| for x in [a_lo, a_hi], y in [b_lo, b_hi].
Interval gap_interval(double a_lo, double a_hi, double b_lo, double b_hi);

struct TrendRow {
  int R = 0;
  ThresholdEstimate alpha_c;
  double gap = 0.0;
  Interval gap_range;
};

struct TrendReport {
  int d = 3;
  long box = 16;
  double p_star = 0.5;
  std::uint64_t seed = 0;
  ThresholdEstimate pc;  // product measure, computed once
  std::vector<TrendRow> rows;
};

// alpha_c(R) for each R next to p_c at the same box. The product-measure
// estimate uses derive_seed(seed, 0) and row R uses derive_seed(seed, 1 + R).
TrendReport theorem_trend_report(int d, std::span<const int> R_list, long box,
                                 double p_star, double tolerance,
                                 const ThresholdSchedule& schedule,
                                 const StoppingPolicy& policy,
                                 std::uint64_t seed,
                                 const ParallelMap& pool = serial_map(),
                                 double level = kDefaultLevel);

// Columns d, R, box, p_star, alpha_c_hat, ci_lo, ci_hi, pc_hat, pc_ci_lo,
// pc_ci_hi, gap, n_total, seed.
std::string trend_csv(const TrendReport& r, const std::vector<std::string>& comments = {});
std::string curve_csv(const CrossingCurve& c, const std::vector<std::string>& comments = {});
std::string trace_csv(const ThresholdEstimate& e, const std::vector<std::string>& comments = {});

}  // namespace voterperc
