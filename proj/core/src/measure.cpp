#include "voterperc/measure.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "voterperc/walks.hpp"

namespace voterperc {

void validate_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1], got " +
                                std::to_string(alpha));
  }
}

DualBlocks dual_blocks(std::span<const Point> A, int R,
                       const StoppingPolicy& policy, Rng& rng) {
  const CoalescenceRun run = run_coalescence(A, R, policy, rng);
  DualBlocks out;
  out.reason = run.reason;
  out.stop_time = run.stop_time;
  const auto n = run.ground.size();
  std::vector<std::uint32_t> id_of_mark(n, MarkedPartition::kNone);
  for (auto m : run.terminal.marks()) id_of_mark[m] = out.count++;
  out.block.resize(n);
  for (MarkedPartition::Index v = 0; v < n; ++v) {
    out.block[v] = id_of_mark[run.terminal.label(v)];
  }
  return out;
}

namespace {

std::vector<std::uint8_t> label_blocks(const DualBlocks& blocks, double alpha,
                                       Rng& rng) {
  std::vector<std::uint8_t> zeta(blocks.count);
  for (auto& z : zeta) z = bernoulli(rng, alpha) ? 1 : 0;
  std::vector<std::uint8_t> xi(blocks.block.size());
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = zeta[blocks.block[i]];
  return xi;
}

Provenance mu_provenance(const std::string& sampler, int d, int R, double alpha,
                         std::uint64_t seed) {
  Provenance p;
  p.sampler = sampler;
  p.d = d;
  p.R = R;
  p.alpha = alpha;
  p.seed = seed;
  return p;
}

}  // namespace

FieldSample sample_mu_sites(std::span<const Point> A, double alpha, int R,
                            const StoppingPolicy& policy, std::uint64_t seed) {
  validate_alpha(alpha);
  if (A.empty()) throw std::invalid_argument("empty window");
  Rng rng(seed);
  const DualBlocks blocks = dual_blocks(A, R, policy, rng);
  const auto xi = label_blocks(blocks, alpha, rng);
  Provenance p = mu_provenance("mu_duality", A.front().dim(), R, alpha, seed);
  if (policy.fixed_horizon) {
    p.horizon_kind = "t";
    p.horizon = policy.truncation.t_max;
  } else {
    p.horizon_kind = "eps_stop";
    p.horizon = policy.eps_stop;
  }
  p.extra["stopping"] = policy.describe();
  p.extra["stop_reason"] = to_string(blocks.reason);
  p.extra["blocks"] = std::to_string(blocks.count);
  return FieldSample::on_sites(A, xi, std::move(p));
}

FieldSample sample_mu(const BoxSpec& window, double alpha, int R,
                      const StoppingPolicy& policy, std::uint64_t seed) {
  const auto sites = window.points();
  return sample_mu_sites(sites, alpha, R, policy, seed);
}

FieldSample sample_bernoulli_sites(std::span<const Point> A, double alpha,
                                   std::uint64_t seed) {
  validate_alpha(alpha);
  if (A.empty()) throw std::invalid_argument("empty window");
  Rng rng(seed);
  std::vector<std::uint8_t> xi(A.size());
  for (auto& v : xi) v = bernoulli(rng, alpha) ? 1 : 0;
  return FieldSample::on_sites(
      A, xi, mu_provenance("bernoulli", A.front().dim(), 0, alpha, seed));
}

FieldSample sample_bernoulli(const BoxSpec& window, double alpha,
                             std::uint64_t seed) {
  const auto sites = window.points();
  return sample_bernoulli_sites(sites, alpha, seed);
}

FieldSample sample_mu_finite_time_sites(std::span<const Point> A, double alpha,
                                        int R, double t, std::uint64_t seed) {
  validate_alpha(alpha);
  FieldSample xi = sample_mu_sites(A, alpha, R, StoppingPolicy::at_time(t), seed);
  xi.provenance().sampler = "mu_finite_time";
  return xi;
}

FieldSample sample_mu_finite_time(const BoxSpec& window, double alpha, int R,
                                  double t, std::uint64_t seed) {
  const auto sites = window.points();
  return sample_mu_finite_time_sites(sites, alpha, R, t, seed);
}

FieldSample forward_voter_torus(int side, int d, double alpha, int R, double t,
                                std::uint64_t seed, int window_radius) {
  validate_alpha(alpha);
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("bad dimension");
  if (side < 1) throw std::invalid_argument("torus side must be >= 1");
  if (!(t >= 0.0)) throw std::invalid_argument("time must be >= 0");
  if (window_radius < 0 || 2 * window_radius + 1 > side) {
    throw std::invalid_argument("window does not fit in the torus");
  }
  const JumpKernel kernel(d, R);
  std::uint64_t volume = 1;
  for (int i = 0; i < d; ++i) volume *= static_cast<std::uint64_t>(side);

  Rng rng(seed);
  std::vector<std::uint8_t> state(volume);
  for (auto& v : state) v = bernoulli(rng, alpha) ? 1 : 0;

  // Every site rings at rate 1, so the number of rings is Poisson and each
  // ring picks a uniform site; copy times themselves are not needed.
  const double mean_rings = static_cast<double>(volume) * t;
  const auto rings =
      mean_rings > 0.0
          ? std::poisson_distribution<std::uint64_t>(mean_rings)(rng)
          : std::uint64_t{0};
  std::array<int, kMaxDim> coord{};
  for (std::uint64_t e = 0; e < rings; ++e) {
    std::uint64_t site = uniform_below(rng, volume);
    const Point& off = kernel.sample(rng);
    std::uint64_t rest = site;
    for (int i = d - 1; i >= 0; --i) {
      coord[i] = static_cast<int>(rest % static_cast<std::uint64_t>(side));
      rest /= static_cast<std::uint64_t>(side);
    }
    std::uint64_t src = 0;
    for (int i = 0; i < d; ++i) {
      int c = coord[i] + off[i];
      c %= side;
      if (c < 0) c += side;
      src = src * static_cast<std::uint64_t>(side) + static_cast<std::uint64_t>(c);
    }
    state[site] = state[src];
  }

  const BoxSpec window = linf_box(Point::zero(d), window_radius);
  const auto sites = window.points();
  std::vector<std::uint8_t> values;
  values.reserve(sites.size());
  const int centre = side / 2;
  for (const auto& p : sites) {
    std::uint64_t idx = 0;
    for (int i = 0; i < d; ++i) {
      idx = idx * static_cast<std::uint64_t>(side) +
            static_cast<std::uint64_t>(p[i] + centre);
    }
    values.push_back(state[idx]);
  }
  Provenance p = mu_provenance("forward_torus", d, R, alpha, seed);
  p.horizon_kind = "t";
  p.horizon = t;
  p.extra["side"] = std::to_string(side);
  return FieldSample::on_box(window, std::move(values), std::move(p));
}

FieldSampler mu_sampler(std::vector<Point> A, double alpha, int R,
                        StoppingPolicy policy) {
  validate_alpha(alpha);
  auto sites = std::make_shared<const std::vector<Point>>(std::move(A));
  return [sites, alpha, R, policy](std::uint64_t seed) {
    return sample_mu_sites(*sites, alpha, R, policy, seed);
  };
}

FieldSampler bernoulli_sampler(std::vector<Point> A, double alpha) {
  validate_alpha(alpha);
  auto sites = std::make_shared<const std::vector<Point>>(std::move(A));
  return [sites, alpha](std::uint64_t seed) {
    return sample_bernoulli_sites(*sites, alpha, seed);
  };
}

FieldSampler finite_time_sampler(std::vector<Point> A, double alpha, int R,
                                 double t) {
  validate_alpha(alpha);
  auto sites = std::make_shared<const std::vector<Point>>(std::move(A));
  return [sites, alpha, R, t](std::uint64_t seed) {
    return sample_mu_finite_time_sites(*sites, alpha, R, t, seed);
  };
}

FieldSampler torus_sampler(int side, int d, double alpha, int R, double t,
                           int window_radius) {
  validate_alpha(alpha);
  return [=](std::uint64_t seed) {
    return forward_voter_torus(side, d, alpha, R, t, seed, window_radius);
  };
}

CylinderEvent::CylinderEvent(std::vector<Point> base, Predicate predicate,
                             std::string name)
    : base_(std::move(base)), pred_(std::move(predicate)), name_(std::move(name)) {
  if (base_.empty()) throw std::invalid_argument("cylinder base must be nonempty");
  if (!pred_) throw std::invalid_argument("cylinder predicate missing");
}

CylinderEvent CylinderEvent::everything(int d) {
  return CylinderEvent({Point::zero(d)},
                       [](std::span<const std::uint8_t>) { return true; },
                       "everything");
}

CylinderEvent CylinderEvent::pattern(std::vector<Point> sites,
                                     std::vector<std::uint8_t> values) {
  if (sites.size() != values.size()) {
    throw std::invalid_argument("pattern sites and values differ in length");
  }
  std::string name = "pattern";
  for (std::size_t i = 0; i < sites.size(); ++i) {
    name += ' ' + sites[i].to_string() + '=' + std::to_string(values[i]);
  }
  return CylinderEvent(
      std::move(sites),
      [values](std::span<const std::uint8_t> v) {
        return std::equal(values.begin(), values.end(), v.begin(), v.end());
      },
      std::move(name));
}

bool CylinderEvent::holds(const FieldSample& xi, const Point& shift) const {
  std::vector<std::uint8_t> values;
  values.reserve(base_.size());
  for (const auto& b : base_) values.push_back(xi.at(b + shift));
  return pred_(values);
}

bool CylinderEvent::holds(const FieldSample& xi) const {
  return holds(xi, Point::zero(base_.front().dim()));
}

EstimateWithCI estimate_event_prob(const CylinderEvent& E,
                                   const FieldSampler& sampler, std::uint64_t n,
                                   std::uint64_t seed, const ParallelMap& pool,
                                   double level) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const auto hits = pool.map_reduce(
      n, std::uint64_t{0},
      [&](std::size_t i) -> std::uint64_t {
        return E.holds(sampler(derive_seed(seed, i))) ? 1 : 0;
      },
      [](std::uint64_t& acc, std::uint64_t v) { acc += v; });
  return proportion_estimate(hits, n, level);
}

CovarianceEstimate covariance_from_counts(std::uint64_t n, std::uint64_t n_x,
                                          std::uint64_t n_y, std::uint64_t n_xy,
                                          double level) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  CovarianceEstimate out;
  const double nn = static_cast<double>(n);
  out.mean_x = static_cast<double>(n_x) / nn;
  out.mean_y = static_cast<double>(n_y) / nn;
  out.via_joint = static_cast<double>(n_xy) / nn - out.mean_x * out.mean_y;
  const __int128 num = static_cast<__int128>(n) * n_xy -
                       static_cast<__int128>(n_x) * n_y;
  out.via_centred = static_cast<double>(num) / (nn * nn);

  const double cov = out.via_centred;
  const double cells[4] = {
      static_cast<double>(n - n_x - n_y + n_xy),  // 00
      static_cast<double>(n_x - n_xy),            // 10
      static_cast<double>(n_y - n_xy),            // 01
      static_cast<double>(n_xy)};                 // 11
  double m4 = 0.0;
  for (int c = 0; c < 4; ++c) {
    const double dx = (c & 1) - out.mean_x;
    const double dy = ((c >> 1) & 1) - out.mean_y;
    m4 += cells[c] / nn * dx * dx * dy * dy;
  }
  const double se = std::sqrt(std::max(0.0, m4 - cov * cov) / nn);
  const double z = z_for_level(level);
  out.covariance = {cov, se, cov - z * se, cov + z * se, n, level};
  return out;
}

namespace {

struct PairCounts {
  std::uint64_t x = 0, y = 0, xy = 0;
};

}  // namespace

CovarianceEstimate estimate_covariance(const Point& x, const Point& y,
                                       const FieldSampler& sampler,
                                       std::uint64_t n, std::uint64_t seed,
                                       const ParallelMap& pool, double level) {
  if (x == y) throw std::invalid_argument("covariance needs distinct sites");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const auto c = pool.map_reduce(
      n, PairCounts{},
      [&](std::size_t i) {
        const FieldSample xi = sampler(derive_seed(seed, i));
        const auto a = xi.at(x), b = xi.at(y);
        return PairCounts{a, b, static_cast<std::uint64_t>(a & b)};
      },
      [](PairCounts& acc, const PairCounts& v) {
        acc.x += v.x;
        acc.y += v.y;
        acc.xy += v.xy;
      });
  return covariance_from_counts(n, c.x, c.y, c.xy, level);
}

CovarianceEstimate estimate_covariance(const Point& x, const Point& y,
                                       double alpha, int R, std::uint64_t n,
                                       const StoppingPolicy& policy,
                                       std::uint64_t seed,
                                       const ParallelMap& pool, double level) {
  if (x == y) throw std::invalid_argument("covariance needs distinct sites");
  return estimate_covariance(x, y, mu_sampler({x, y}, alpha, R, policy), n,
                             seed, pool, level);
}

EstimateWithCI tv_to_product(std::span<const std::uint64_t> counts,
                             std::size_t k, double alpha, double level) {
  const std::size_t cells = std::size_t{1} << k;
  if (counts.size() != cells) throw std::invalid_argument("need 2^k cells");
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) throw std::invalid_argument("no samples");
  const double nn = static_cast<double>(n);
  double tv = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const int ones = std::popcount(c);
    const double q = std::pow(alpha, ones) *
                     std::pow(1.0 - alpha, static_cast<double>(k) - ones);
    const double p = static_cast<double>(counts[c]) / nn;
    tv += std::abs(p - q);
    const double s = p > q ? 1.0 : (p < q ? -1.0 : 0.0);
    s1 += s * p;
    s2 += s * s * p;
  }
  tv *= 0.5;
  const double se = 0.5 * std::sqrt(std::max(0.0, s2 - s1 * s1) / nn);
  const double z = z_for_level(level);
  return {tv, se, std::max(0.0, tv - z * se), tv + z * se, n, level};
}

std::vector<LocalBernoulliRow> check_local_bernoulli(
    std::span<const Point> sites, double alpha, std::span<const int> R_list,
    std::uint64_t n, const StoppingPolicy& policy, std::uint64_t seed,
    const ParallelMap& pool, double level) {
  validate_alpha(alpha);
  const std::size_t k = sites.size();
  if (k < 1 || k > 4) throw std::invalid_argument("need 1 to 4 sites");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const std::vector<Point> A(sites.begin(), sites.end());
  std::vector<LocalBernoulliRow> rows;
  for (int R : R_list) {
    const auto sampler = mu_sampler(A, alpha, R, policy);
    const std::uint64_t row_seed = derive_seed(seed, static_cast<std::uint64_t>(R));
    using Counts = std::array<std::uint64_t, 16>;
    const Counts counts = pool.map_reduce(
        n, Counts{},
        [&](std::size_t i) {
          const FieldSample xi = sampler(derive_seed(row_seed, i));
          std::size_t cell = 0;
          for (std::size_t j = 0; j < k; ++j) {
            cell |= static_cast<std::size_t>(xi.at(A[j])) << j;
          }
          Counts one{};
          one[cell] = 1;
          return one;
        },
        [](Counts& acc, const Counts& v) {
          for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += v[c];
        });
    LocalBernoulliRow row;
    row.R = R;
    const std::size_t cells = std::size_t{1} << k;
    for (std::size_t c = 0; c < cells; ++c) {
      row.joint.push_back(static_cast<double>(counts[c]) / static_cast<double>(n));
    }
    row.tv = tv_to_product(std::span(counts.data(), cells), k, alpha, level);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace voterperc
