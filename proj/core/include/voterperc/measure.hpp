#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "voterperc/coalescence.hpp"
#include "voterperc/field.hpp"
#include "voterperc/lattice.hpp"
#include "voterperc/parallel.hpp"
#include "voterperc/stats.hpp"

namespace voterperc {

// Block structure of the dual coalescing walks on a ground set: block[i] is
// a dense id in [0, count) for ground point i, numbered by increasing mark
// index.
struct DualBlocks {
  std::vector<std::uint32_t> block;
  std::uint32_t count = 0;
  StopReason reason = StopReason::kHorizon;
  double stop_time = 0.0;
};

DualBlocks dual_blocks(std::span<const Point> A, int R,
                       const StoppingPolicy& policy, Rng& rng);

// Stationary sampler: coalescing walks from A, independent Bernoulli(alpha)
// labels per terminal block, xi(x) = label of x's block. Exact in law up to
// the truncation described by `policy`. Throws std::invalid_argument for
// alpha outside [0, 1].
FieldSample sample_mu(const BoxSpec& window, double alpha, int R,
                      const StoppingPolicy& policy, std::uint64_t seed);
FieldSample sample_mu_sites(std::span<const Point> A, double alpha, int R,
                            const StoppingPolicy& policy, std::uint64_t seed);

// Product measure pi_alpha on the window.
FieldSample sample_bernoulli(const BoxSpec& window, double alpha,
                             std::uint64_t seed);
FieldSample sample_bernoulli_sites(std::span<const Point> A, double alpha,
                                   std::uint64_t seed);

// The voter model at time t started from pi_alpha, via duality on [0, t].
FieldSample sample_mu_finite_time(const BoxSpec& window, double alpha, int R,
                                  double t, std::uint64_t seed);
FieldSample sample_mu_finite_time_sites(std::span<const Point> A, double alpha,
                                        int R, double t, std::uint64_t seed);

// Forward voter dynamics on the torus (Z / side Z)^d from pi_alpha for time
// t. Returns the values on B(window_radius) around the torus centre,
// relabelled so that the centre is the origin.
FieldSample forward_voter_torus(int side, int d, double alpha, int R, double t,
                                std::uint64_t seed, int window_radius = 1);

// Draws one configuration from a replicate seed.
using FieldSampler = std::function<FieldSample(std::uint64_t seed)>;

FieldSampler mu_sampler(std::vector<Point> A, double alpha, int R,
                        StoppingPolicy policy);
FieldSampler bernoulli_sampler(std::vector<Point> A, double alpha);
FieldSampler finite_time_sampler(std::vector<Point> A, double alpha, int R,
                                 double t);
FieldSampler torus_sampler(int side, int d, double alpha, int R, double t,
                           int window_radius);

// A cylinder event: a predicate on the values of xi on a finite base set B
// (values handed over in the order of `base`).
class CylinderEvent {
 public:
  using Predicate = std::function<bool(std::span<const std::uint8_t>)>;

  CylinderEvent(std::vector<Point> base, Predicate predicate,
                std::string name = "event");

  // The whole space, on base {0}.
  static CylinderEvent everything(int d);
  // {xi(sites[i]) = values[i] for all i}.
  static CylinderEvent pattern(std::vector<Point> sites,
                               std::vector<std::uint8_t> values);

  const std::vector<Point>& base() const { return base_; }
  const std::string& name() const { return name_; }
  bool test(std::span<const std::uint8_t> values) const { return pred_(values); }
  // Whether xi lies in theta_shift E, i.e. the predicate on
  // (xi(shift + b))_{b in B}. Throws std::out_of_range if the sample does
  // not cover shift + B.
  bool holds(const FieldSample& xi, const Point& shift) const;
  bool holds(const FieldSample& xi) const;

 private:
  std::vector<Point> base_;
  Predicate pred_;
  std::string name_;
};

// Monte Carlo frequency of E with a Wilson interval. Replicate i draws from
// sampler(derive_seed(seed, i)).
EstimateWithCI estimate_event_prob(const CylinderEvent& E,
                                   const FieldSampler& sampler, std::uint64_t n,
                                   std::uint64_t seed,
                                   const ParallelMap& pool = serial_map(),
                                   double level = kDefaultLevel);

// Cov(xi(x), xi(y)) from a replicate set, with a delta-method interval.
struct CovarianceEstimate {
  EstimateWithCI covariance;
  // The same quantity computed as P(11) - P(1.)P(.1) and as the centred
  // product mean; both come from exact integer counts.
  double via_joint = 0.0;
  double via_centred = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
};

CovarianceEstimate covariance_from_counts(std::uint64_t n, std::uint64_t n_x,
                                          std::uint64_t n_y, std::uint64_t n_xy,
                                          double level = kDefaultLevel);

// Uses sample_mu on {x, y}. Throws std::invalid_argument for x == y.
CovarianceEstimate estimate_covariance(const Point& x, const Point& y,
                                       double alpha, int R, std::uint64_t n,
                                       const StoppingPolicy& policy,
                                       std::uint64_t seed,
                                       const ParallelMap& pool = serial_map(),
                                       double level = kDefaultLevel);
CovarianceEstimate estimate_covariance(const Point& x, const Point& y,
                                       const FieldSampler& sampler,
                                       std::uint64_t n, std::uint64_t seed,
                                       const ParallelMap& pool = serial_map(),
                                       double level = kDefaultLevel);

// Total-variation distance between the empirical joint law of
// (xi(x_1), ..., xi(x_k)) and the product Bernoulli(alpha) law.
struct LocalBernoulliRow {
  int R = 0;
  std::vector<double> joint;  // cell c <-> bits of c, x_1 in the lowest bit
  EstimateWithCI tv;
};

// Requires 1 <= sites.size() <= 4 and distinct sites. Row for R uses seed
// derive_seed(seed, R).
std::vector<LocalBernoulliRow> check_local_bernoulli(
    std::span<const Point> sites, double alpha, std::span<const int> R_list,
    std::uint64_t n, const StoppingPolicy& policy, std::uint64_t seed,
    const ParallelMap& pool = serial_map(), double level = kDefaultLevel);

// TV between an empirical cell distribution (counts) and the product law,
// with a delta-method interval.
EstimateWithCI tv_to_product(std::span<const std::uint64_t> counts,
                             std::size_t k, double alpha,
                             double level = kDefaultLevel);

void validate_alpha(double alpha);

}  // namespace voterperc
