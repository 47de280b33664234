#include "voterperc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>
#include <stdexcept>

#include "voterperc/io.hpp"

namespace voterperc {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

Verdict compose_verdict(const EstimateWithCI& lhs, double rhs_lo, double rhs_hi) {
  if (lhs.ci_hi <= rhs_lo) return Verdict::kPass;
  if (lhs.ci_lo > rhs_hi) return Verdict::kFail;
  return Verdict::kInconclusive;
}

RhsProduct pair_product(std::span<const Point> sites, double c,
                        MeetingProbabilityCache& h) {
  std::vector<Point> near;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      const Point w = sites[j] - sites[i];
      if (linf_norm(w) <= h.direct_radius()) near.push_back(w);
    }
  }
  h.prefetch(near);
  // Sum logs to keep large products finite as long as possible.
  double log_lo = 0.0, log_pt = 0.0, log_hi = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      const HBounds b = h.at(sites[j] - sites[i]);
      log_lo += std::log1p(b.lo * c);
      log_pt += std::log1p(b.point * c);
      log_hi += std::log1p(b.hi * c);
    }
  }
  return {std::exp(log_lo), std::exp(log_pt), std::exp(log_hi)};
}

namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0,1)");
}

std::string join_points(std::span<const Point> pts) {
  std::string s;
  for (const auto& p : pts) {
    if (!s.empty()) s += ' ';
    s += p.to_string();
  }
  return s;
}

}  // namespace

InequalityReport check_exponential_eta(std::span<const Point> A, int R,
                                       double beta, std::uint64_t n,
                                       const StoppingPolicy& policy,
                                       MeetingProbabilityCache& h,
                                       std::uint64_t seed,
                                       const ParallelMap& pool, double level) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1)");
  }
  if (A.empty()) throw std::invalid_argument("A must be nonempty");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  check_level(level);
  InequalityReport rep;
  rep.inequality = "exponential_eta";
  rep.params = {{"A", join_points(A)},
                {"R", std::to_string(R)},
                {"beta", format_double(beta)},
                {"n", std::to_string(n)},
                {"stopping", policy.describe()},
                {"seed", std::to_string(seed)}};

  const std::vector<Point> ground(A.begin(), A.end());
  const RunningMoments m = pool.map_reduce(
      n, RunningMoments{},
      [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        const CoalescenceRun run = run_coalescence(ground, R, policy, rng);
        RunningMoments one;
        one.add(std::pow(beta, -static_cast<double>(run.merged_away())));
        return one;
      },
      [](RunningMoments& acc, const RunningMoments& v) { acc.merge(v); });
  rep.lhs = mean_estimate(m, level);

  const RhsProduct rhs = pair_product(A, 1.0 / (beta * beta) - 1.0, h);
  rep.rhs = rhs.point;
  rep.rhs_lo = rhs.lo;
  rep.rhs_hi = rhs.hi;
  rep.margin = rep.rhs_lo - rep.lhs.ci_hi;
  rep.verdict = compose_verdict(rep.lhs, rep.rhs_lo, rep.rhs_hi);
  rep.disclosure =
      "coalescence is truncated (" + policy.describe() +
      "), which can only drop merges and so biases the LHS downward; far-pair "
      "h upper bounds use the fitted |w|^(2-d) envelope";
  return rep;
}

double exact_pi_alpha(const CylinderEvent& E, double alpha) {
  validate_alpha(alpha);
  const std::size_t k = E.base().size();
  if (k > kExactPiMaxBase) {
    throw std::length_error("exact pi_alpha needs |B| <= 20, got " + std::to_string(k));
  }
  std::vector<std::uint8_t> v(k);
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    int ones = 0;
    for (std::size_t i = 0; i < k; ++i) {
      v[i] = static_cast<std::uint8_t>((mask >> i) & 1);
      ones += v[i];
    }
    if (!E.test(v)) continue;
    total += std::pow(alpha, ones) * std::pow(1.0 - alpha, static_cast<double>(k) - ones);
  }
  return total;
}

InequalityReport check_disjointly(const CylinderEvent& E,
                                  std::span<const Point> shifts, double alpha,
                                  int R, std::uint64_t n,
                                  const StoppingPolicy& policy,
                                  MeetingProbabilityCache& h,
                                  std::uint64_t seed, const ParallelMap& pool,
                                  std::uint64_t n_pi, double level) {
  validate_alpha(alpha);
  check_level(level);
  if (shifts.empty()) throw std::invalid_argument("need at least one translate");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const auto& B = E.base();
  const int d = B.front().dim();
  if (std::find(B.begin(), B.end(), Point::zero(d)) == B.end()) {
    throw std::invalid_argument("the base set must contain 0");
  }
  std::set<Point> seen;
  std::vector<Point> U;
  for (const auto& x : shifts) {
    for (const auto& b : B) {
      const Point p = x + b;
      if (!seen.insert(p).second) {
        throw std::invalid_argument("translates x_i + B overlap at " + p.to_string());
      }
      U.push_back(p);
    }
  }
  std::sort(U.begin(), U.end());

  InequalityReport rep;
  rep.inequality = "disjointly";
  rep.params = {{"event", E.name()},
                {"B_size", std::to_string(B.size())},
                {"shifts", join_points(shifts)},
                {"alpha", format_double(alpha)},
                {"R", std::to_string(R)},
                {"n", std::to_string(n)},
                {"stopping", policy.describe()},
                {"seed", std::to_string(seed)}};

  // pi_alpha(E): exact when small, else Monte Carlo with an interval.
  double pi = 0.0, pi_lo = 0.0, pi_hi = 0.0;
  if (B.size() <= kExactPiMaxBase) {
    pi = pi_lo = pi_hi = exact_pi_alpha(E, alpha);
    rep.params["pi_alpha"] = format_double(pi) + " (exact)";
  } else {
    const auto est = estimate_event_prob(E, bernoulli_sampler(B, alpha), n_pi,
                                         derive_seed(seed, 0xB1u << 20), pool, level);
    pi = est.estimate;
    pi_lo = est.ci_lo;
    pi_hi = est.ci_hi;
    rep.params["pi_alpha"] = format_double(pi) + " [" + format_double(pi_lo) + ", " +
                             format_double(pi_hi) + "] (n=" + std::to_string(n_pi) + ")";
  }
  if (!(pi_hi > 0.0)) throw std::invalid_argument("pi_alpha(E) = 0: RHS undefined");

  const auto k = static_cast<double>(shifts.size());
  if (shifts.size() == 1 && B.size() == 1) {
    // A single site: its mu-marginal equals the pi-marginal exactly.
    rep.lhs = {pi, 0.0, pi, pi, n, level};
    rep.disclosure = "single-site event: LHS exact by the density property";
  } else {
    const auto sampler = mu_sampler(U, alpha, R, policy);
    const auto hits = pool.map_reduce(
        n, std::uint64_t{0},
        [&](std::size_t i) -> std::uint64_t {
          const FieldSample xi = sampler(derive_seed(seed, i));
          for (const auto& x : shifts) {
            if (!E.holds(xi, x)) return 0;
          }
          return 1;
        },
        [](std::uint64_t& acc, std::uint64_t v) { acc += v; });
    rep.lhs = proportion_estimate(hits, n, level);
    rep.disclosure =
        "coalescence is truncated (" + policy.describe() +
        "); far-pair h upper bounds use the fitted |w|^(2-d) envelope";
  }

  auto rhs_at = [&](double p) {
    const RhsProduct prod = pair_product(U, 1.0 / (p * p) - 1.0, h);
    const double base = std::pow(p, k);
    return RhsProduct{base * prod.lo, base * prod.point, base * prod.hi};
  };
  const RhsProduct at_point = rhs_at(pi);
  rep.rhs = at_point.point;
  rep.rhs_lo = at_point.lo;
  rep.rhs_hi = at_point.hi;
  if (pi_lo != pi_hi) {
    // The RHS is not monotone in pi; scan the interval.
    constexpr int kGrid = 9;
    for (int g = 0; g < kGrid; ++g) {
      const double p = std::max(1e-12, pi_lo + (pi_hi - pi_lo) * g / (kGrid - 1));
      const RhsProduct r = rhs_at(p);
      rep.rhs_lo = std::min(rep.rhs_lo, r.lo);
      rep.rhs_hi = std::max(rep.rhs_hi, r.hi);
    }
  }
  rep.margin = rep.rhs_lo - rep.lhs.ci_hi;
  rep.verdict = compose_verdict(rep.lhs, rep.rhs_lo, rep.rhs_hi);
  return rep;
}

CylinderEvent annulus_crossing_event(int d, long inner, long outer) {
  const BoxSpec window = linf_box(Point::zero(d), static_cast<int>(outer));
  const CrossingQuery q = CrossingQuery::annulus(Point::zero(d), inner, outer);
  return CylinderEvent(
      window.points(),
      [window, q](std::span<const std::uint8_t> v) {
        return crossing(FieldSample::on_box(window, {v.begin(), v.end()}), q);
      },
      "crossing " + q.inner.describe() + " <-> " + q.outer.describe());
}

namespace {

nlohmann::ordered_json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

std::string report_to_json(const InequalityReport& r,
                           const std::map<std::string, std::string>& config) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = kVersion;
  j["config"] = config;
  j["inequality"] = r.inequality;
  j["params"] = r.params;
  j["lhs"] = {{"estimate", r.lhs.estimate}, {"stderr", r.lhs.std_error},
              {"ci_lo", r.lhs.ci_lo},       {"ci_hi", r.lhs.ci_hi},
              {"n", r.lhs.n},               {"level", r.lhs.level}};
  j["rhs"] = {{"point", number_or_string(r.rhs)},
              {"lo", number_or_string(r.rhs_lo)},
              {"hi", number_or_string(r.rhs_hi)}};
  j["margin"] = number_or_string(r.margin);
  j["verdict"] = to_string(r.verdict);
  j["disclosure"] = r.disclosure;
  return j.dump(1) + '\n';
}

std::string reports_to_csv(std::span<const InequalityReport> reports,
                           const std::vector<std::string>& comments) {
  CsvTable t;
  t.comments = comments;
  t.header = {"id",     "inequality", "params", "lhs",    "lhs_ci_lo", "lhs_ci_hi",
              "rhs_lo", "rhs",        "rhs_hi", "margin", "verdict"};
  std::size_t id = 0;
  for (const auto& r : reports) {
    std::string params;
    for (const auto& [k, v] : r.params) {
      if (!params.empty()) params += ';';
      params += k + '=' + v;
    }
    t.add_row({std::to_string(id++), r.inequality, params, format_double(r.lhs.estimate),
               format_double(r.lhs.ci_lo), format_double(r.lhs.ci_hi),
               format_double(r.rhs_lo), format_double(r.rhs), format_double(r.rhs_hi),
               format_double(r.margin), to_string(r.verdict)});
  }
  return t.to_string();
}

}  // namespace voterperc
