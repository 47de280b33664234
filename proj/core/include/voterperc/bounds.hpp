#pragma once

#include <cstdint>
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
#include "voterperc/walks.hpp"

namespace voterperc {

enum class Verdict { kPass, kFail, kInconclusive };
std::string to_string(Verdict v);

// A two-sided comparison LHS <= RHS with noisy inputs. The RHS interval comes
// from evaluating the (monotone) RHS at the lower and upper meeting
// probability bounds. pass iff lhs.ci_hi <= rhs_lo; fail iff
// lhs.ci_lo > rhs_hi; inconclusive otherwise.
struct InequalityReport {
  std::string inequality;  // "exponential_eta" or "disjointly"
  EstimateWithCI lhs;
  double rhs = 0.0;     // at the point estimates of h
  double rhs_lo = 0.0;  // at the lower bounds of h (and of pi, if estimated)
  double rhs_hi = 0.0;  // at the upper bounds
  double margin = 0.0;  // rhs_lo - lhs.ci_hi
  Verdict verdict = Verdict::kInconclusive;
  std::map<std::string, std::string> params;
  std::string disclosure;
};

Verdict compose_verdict(const EstimateWithCI& lhs, double rhs_lo, double rhs_hi);

// Product over unordered pairs u < v of sites of (1 + h(u, v) c), returned at
// the lower, point and upper h values: {lo, point, hi}.
struct RhsProduct {
  double lo = 1.0;
  double point = 1.0;
  double hi = 1.0;
};
RhsProduct pair_product(std::span<const Point> sites, double c,
                        MeetingProbabilityCache& h);

// E[beta^(-|A \ M_inf|)] versus prod_{x<y} (1 + h_R(x,y)(beta^-2 - 1)).
// Throws std::invalid_argument for beta outside (0, 1) or empty A.
InequalityReport check_exponential_eta(std::span<const Point> A, int R,
                                       double beta, std::uint64_t n,
                                       const StoppingPolicy& policy,
                                       MeetingProbabilityCache& h,
                                       std::uint64_t seed,
                                       const ParallelMap& pool = serial_map(),
                                       double level = kDefaultLevel);

// Exact pi_alpha(E) by summing over {0,1}^B. Throws std::length_error for
// |B| > 20.
double exact_pi_alpha(const CylinderEvent& E, double alpha);
inline constexpr std::size_t kExactPiMaxBase = 20;

// mu(intersection of theta_{x_i} E) versus
// pi(E)^n prod_{u<v in union}(1 + h(u,v)(pi(E)^-2 - 1)).
// Requires 0 in B, pairwise disjoint translates x_i + B, pi(E) > 0
// (std::invalid_argument otherwise). pi(E) is exact for |B| <= 20 and
// estimated from n_pi product-measure samples otherwise.
InequalityReport check_disjointly(const CylinderEvent& E,
                                  std::span<const Point> shifts, double alpha,
                                  int R, std::uint64_t n,
                                  const StoppingPolicy& policy,
                                  MeetingProbabilityCache& h,
                                  std::uint64_t seed,
                                  const ParallelMap& pool = serial_map(),
                                  std::uint64_t n_pi = 100000,
                                  double level = kDefaultLevel);

// The cylinder event {B(0, inner) <-> B(0, outer)^c} on base B(0, outer),
// nearest-neighbour, open sites.
CylinderEvent annulus_crossing_event(int d, long inner, long outer);

std::string report_to_json(const InequalityReport& r,
                           const std::map<std::string, std::string>& config = {});
// One row per report.
std::string reports_to_csv(std::span<const InequalityReport> reports,
                           const std::vector<std::string>& comments = {});

}  // namespace voterperc
