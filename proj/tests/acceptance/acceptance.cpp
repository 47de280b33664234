// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "commands.hpp"
#include "oracles.hpp"
#include "voterperc/bounds.hpp"
#include "voterperc/coalescence.hpp"
#include "voterperc/io.hpp"
#include "voterperc/measure.hpp"
#include "voterperc/parallel.hpp"
#include "voterperc/percolation.hpp"
#include "voterperc/renorm.hpp"
#include "voterperc/threshold.hpp"
#include "voterperc/walks.hpp"

using namespace voterperc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const Point kO{0, 0, 0};
const Point kE1{1, 0, 0};

Point axis(int r) { return Point{r, 0, 0}; }

const ParallelMap& pool() {
  static const ParallelMap p(std::max(1u, std::thread::hardware_concurrency()));
  return p;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

std::string ci(const EstimateWithCI& e) {
  return fmt(e.estimate) + " [" + fmt(e.ci_lo) + ", " + fmt(e.ci_hi) + "]";
}

// Coalescence horizon for the large-window checks: the pairwise stopping
// rules rarely fire on hundreds of points, so runs are capped in time.
StoppingPolicy capped(double t_max) {
  StoppingPolicy p;
  p.truncation.t_max = t_max;
  return p;
}

// Cell counts of (xi(x), xi(y)), x in the low bit.
std::array<std::uint64_t, 4> tally_pair(const FieldSampler& sampler, const Point& x,
                                        const Point& y, std::uint64_t n, std::uint64_t seed) {
  using Cells = std::array<std::uint64_t, 4>;
  return pool().map_reduce(
      n, Cells{},
      [&](std::size_t i) {
        const auto xi = sampler(derive_seed(seed, i));
        Cells c{};
        ++c[xi.at(x) + 2 * xi.at(y)];
        return c;
      },
      [](Cells& a, const Cells& b) {
        for (int k = 0; k < 4; ++k) a[k] += b[k];
      });
}

Outcome c1_density() {
  const auto window = linf_box(kO, 4);
  const std::uint64_t n = 10000;
  Outcome o{true, ""};
  for (int R : {1, 4}) {
    const std::uint64_t ones = pool().map_reduce(
        n, std::uint64_t{0},
        [&](std::size_t i) -> std::uint64_t {
          return sample_mu(window, 0.5, R, capped(20.0), derive_seed(100 + R, i)).at(kO);
        },
        [](std::uint64_t& a, std::uint64_t b) { a += b; });
    const double mean = static_cast<double>(ones) / static_cast<double>(n);
    o.pass = o.pass && std::abs(mean - 0.5) <= 0.02;
    o.detail += "R=" + std::to_string(R) + " mean " + fmt(mean) + "; ";
  }
  return o;
}

Outcome c2_cross_oracle() {
  const std::uint64_t n = 10000;
  const double t = 5.0;
  const auto fwd = tally_pair(torus_sampler(32, 3, 0.5, 1, t, 1), kO, kE1, n, 201);
  const auto dual = tally_pair(finite_time_sampler({kO, kE1}, 0.5, 1, t), kO, kE1, n, 202);
  auto p = [&](const std::array<std::uint64_t, 4>& c, const std::vector<int>& cells) {
    double s = 0;
    for (int k : cells) s += static_cast<double>(c[k]);
    return s / static_cast<double>(n);
  };
  Outcome o{true, ""};
  const std::vector<std::pair<std::string, std::vector<int>>> marg = {
      {"xi(0)=1", {1, 3}}, {"xi(e1)=1", {2, 3}}, {"both=1", {3}}};
  for (const auto& [name, cells] : marg) {
    const double a = p(fwd, cells), b = p(dual, cells);
    const double se = std::sqrt((a * (1 - a) + b * (1 - b)) / static_cast<double>(n));
    const double z = se > 0 ? std::abs(a - b) / se : 0.0;
    o.pass = o.pass && z <= 3.0;
    o.detail += name + " fwd " + fmt(a) + " dual " + fmt(b) + " z " + fmt(z) + "; ";
  }
  return o;
}

struct BatchSummary {
  int pass = 0, inconclusive = 0, fail = 0;
  std::string failures;
};

template <class Run>
BatchSummary run_batch(std::size_t count, Run run) {
  BatchSummary s;
  for (std::size_t i = 0; i < count; ++i) {
    const InequalityReport r = run(i);
    if (r.verdict == Verdict::kPass) ++s.pass;
    if (r.verdict == Verdict::kInconclusive) ++s.inconclusive;
    if (r.verdict == Verdict::kFail) {
      ++s.fail;
      s.failures += " #" + std::to_string(i) + " lhs " + ci(r.lhs) + " rhs_hi " + fmt(r.rhs_hi);
    }
  }
  return s;
}

TruncationPolicy h_policy() {
  TruncationPolicy t;
  t.t_max = 1e6;
  t.escape_factor = 8.0;
  return t;
}

Outcome c3_exponential_eta() {
  const auto batch = cli::standard_eta_batch();
  std::map<int, std::unique_ptr<MeetingProbabilityCache>> caches;
  for (int R : {2, 4}) {
    caches[R] = std::make_unique<MeetingProbabilityCache>(3, R, 10000, h_policy(),
                                                          derive_seed(300, R), 4, pool());
  }
  const auto s = run_batch(batch.size(), [&](std::size_t i) {
    const auto& k = batch[i];
    return check_exponential_eta(k.A, k.R, k.beta, 100000, capped(200.0), *caches[k.R],
                                 derive_seed(301, i), pool());
  });
  return {s.fail == 0 && s.pass >= 7,
          std::to_string(s.pass) + " pass, " + std::to_string(s.inconclusive) +
              " inconclusive, " + std::to_string(s.fail) + " fail" + s.failures};
}

Outcome c4_disjointly() {
  const auto batch = cli::standard_disjointly_batch();
  std::map<int, std::unique_ptr<MeetingProbabilityCache>> caches;
  int crossing_cases = 0;
  const auto s = run_batch(batch.size(), [&](std::size_t i) {
    const auto& k = batch[i];
    if (k.event.rfind("crossing", 0) == 0) ++crossing_cases;
    auto& cache = caches[k.R];
    if (!cache) {
      cache = std::make_unique<MeetingProbabilityCache>(3, k.R, 10000, h_policy(),
                                                        derive_seed(400, k.R), 4, pool());
    }
    return check_disjointly(cli::make_event(k.event, 3), k.shifts, k.alpha, k.R, 100000,
                            capped(20.0), *cache, derive_seed(401, i), pool());
  });
  return {s.fail == 0 && crossing_cases >= 2,
          std::to_string(s.pass) + " pass, " + std::to_string(s.inconclusive) +
              " inconclusive, " + std::to_string(s.fail) + " fail, " +
              std::to_string(crossing_cases) + " crossing cases" + s.failures};
}

Outcome c5_h_decay() {
  std::vector<double> r, h;
  std::string detail;
  for (int k : {2, 4, 8, 16}) {
    const auto m = estimate_h(kO, axis(k), 1, 100000, h_policy(), derive_seed(500, k), pool());
    r.push_back(k);
    h.push_back(m.estimate.estimate);
    detail += "h(" + std::to_string(k) + ")=" + fmt(m.estimate.estimate) + " ";
  }
  const double slope = loglog_slope(r, h);
  return {slope >= -1.3 && slope <= -0.7, detail + "slope " + fmt(slope)};
}

Outcome c6_f_monotone() {
  std::vector<std::pair<Point, Point>> pairs;
  for (int k : {2, 4, 8}) pairs.emplace_back(kO, axis(k));
  std::vector<FEstimate> f;
  std::string detail;
  for (int R : {1, 4, 8}) {
    f.push_back(estimate_fR(R, 3, pairs, 20000, h_policy(), derive_seed(600, R), pool()));
    detail += "f(" + std::to_string(R) + ")=" + fmt(f.back().value) + " [" +
              fmt(f.back().lower) + ", " + fmt(f.back().upper) + "] ";
  }
  const bool pass = f[0].lower > f[1].upper && f[1].lower > f[2].upper;
  return {pass, detail};
}

Outcome c7_local_bernoulli() {
  const std::vector<Point> sites{kO, kE1};
  const std::vector<int> Rs{1, 4, 16};
  const auto rows = check_local_bernoulli(sites, 0.5, Rs, 100000, capped(200.0), 700, pool());
  std::string detail;
  for (const auto& row : rows) detail += "R=" + std::to_string(row.R) + " tv " + ci(row.tv) + "; ";
  const bool pass = rows[0].tv.ci_lo > rows[1].tv.ci_hi && rows[1].tv.ci_lo > rows[2].tv.ci_hi &&
                    rows[2].tv.estimate < 0.05;
  return {pass, detail};
}

Outcome c8_renorm() {
  PairSumEvaluator eval(3, 2);
  std::uint64_t seen = 0, invalid = 0, overlapping = 0, sparse_bad = 0, relaxed_bad = 0,
                pair_bad = 0;
  std::size_t worst_count = 0;
  std::uint64_t worst_bound = 0;
  auto audit = [&](const ProperEmbedding& T) {
    ++seen;
    invalid += !validate_embedding(T);
    overlapping += !leaf_boxes_disjoint(T);
    bool sparse = true, relaxed = true;
    for (const auto& row : sparsity_audit(T, std::max(1, T.N))) {
      sparse = sparse && row.result.pass;
      relaxed = relaxed && row.result.count <= (std::size_t{1} << row.k);
      if (!row.result.pass && row.result.count * worst_bound >= worst_count * row.result.bound) {
        worst_count = row.result.count;
        worst_bound = row.result.bound;
      }
    }
    sparse_bad += !sparse;
    relaxed_bad += !relaxed;
    pair_bad += !check_pair_sum(T, eval).pass;
  };
  const auto enumerated = enumerate_embeddings(1, 3, 2, audit);
  Rng rng(800);
  for (int N : {2, 3}) {
    for (int i = 0; i < 10000; ++i) audit(random_embedding(N, 3, 2, rng));
  }
  const bool pass = enumerated == 2548 && invalid == 0 && overlapping == 0 && sparse_bad == 0 &&
                    pair_bad == 0;
  std::string detail = "enumerated " + std::to_string(enumerated) + ", audited " +
                       std::to_string(seen) + ": invalid " + std::to_string(invalid) +
                       ", overlapping " + std::to_string(overlapping) + ", pair-sum over bound " +
                       std::to_string(pair_bad) + ", sparsity 2^(k-1) violated in " +
                       std::to_string(sparse_bad);
  if (sparse_bad) {
    detail += " (worst " + std::to_string(worst_count) + " > " + std::to_string(worst_bound) + ")";
  }
  detail += ", relaxed 2^k bound violated in " + std::to_string(relaxed_bad);
  return {pass, detail};
}

Outcome c9_embed_from_path() {
  Rng rng(900);
  int ok = 0, total = 0;
  for (int N : {1, 2, 3}) {
    for (int i = 0; i < 100; ++i) {
      ++total;
      const auto gamma = random_crossing_path(N, 2, 3, rng);
      try {
        const auto T = embed_from_path(gamma, N, 2);
        ok += validate_embedding(T) && path_crosses_leaves(gamma, T);
      } catch (const std::exception&) {
      }
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " valid"};
}

Outcome c10_labels() {
  std::vector<Point> sites;
  for (const auto& p : linf_box(kO, 8).points()) {
    if (p[0] < 8 && p[1] < 8 && p[2] < 8) sites.push_back(p);
  }
  Rng rng(1000);
  int agree = 0, total = 0;
  for (int i = 0; i < 1000; ++i) {
    const double p = 0.1 + 0.6 * uniform01(rng);
    std::vector<std::uint8_t> v(sites.size());
    for (auto& x : v) x = uniform01(rng) < p ? 1 : 0;
    const auto xi = FieldSample::on_sites(sites, v);
    for (auto adj : {Adjacency::kNearest, Adjacency::kStar}) {
      ++total;
      agree += oracle::same_partition(label_clusters(xi, adj), oracle::bfs_components(xi, adj), xi);
    }
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) +
                              " partitions identical on 16^3 fields"};
}

Outcome c11_coupling() {
  const auto s = coupling_audit();
  return {s.runs > 0 && s.violations == 0,
          std::to_string(s.runs) + " coalescence runs audited, " + std::to_string(s.violations) +
              " violations"};
}

Outcome c12_trend() {
  const std::vector<int> Rs{1, 2, 4, 8};
  const auto rep = theorem_trend_report(3, Rs, 16, 0.5, 0.01, ThresholdSchedule{2000, 2000},
                                        capped(200.0), 1200, pool());
  std::string detail = "pc " + fmt(rep.pc.alpha_hat) + " [" + fmt(rep.pc.ci_lo) + ", " +
                       fmt(rep.pc.ci_hi) + "]";
  bool weakly = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    detail += "; R=" + std::to_string(r.R) + " alpha_c " + fmt(r.alpha_c.alpha_hat) + " gap " +
              fmt(r.gap) + " [" + fmt(r.gap_range.lo) + ", " + fmt(r.gap_range.hi) + "]";
    // No significant increase between consecutive ranges.
    if (i > 0) weakly = weakly && r.gap_range.lo <= rep.rows[i - 1].gap_range.hi;
  }
  const bool strict = rep.rows.back().gap_range.hi < rep.rows.front().gap_range.lo;
  return {weakly && strict, detail};
}

Outcome c13_em() {
  const std::uint64_t n = 2000;
  std::vector<EstimateWithCI> est;
  std::string detail;
  for (long M : {8, 12, 16}) {
    const auto window = linf_box(kO, static_cast<int>(M));
    const std::uint64_t hits = pool().map_reduce(
        n, std::uint64_t{0},
        [&](std::size_t i) -> std::uint64_t {
          return detect_EM(sample_bernoulli(window, 0.45, derive_seed(1300 + M, i)), M).holds;
        },
        [](std::uint64_t& a, std::uint64_t b) { a += b; });
    est.push_back(proportion_estimate(hits, n));
    detail += "M=" + std::to_string(M) + " " + ci(est.back()) + "; ";
  }
  const bool pass = est[0].estimate <= est[1].estimate && est[1].estimate <= est[2].estimate &&
                    est[2].ci_lo > est[0].ci_hi;
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, c1_density},         {2, c2_cross_oracle},  {3, c3_exponential_eta},
      {4, c4_disjointly},      {5, c5_h_decay},       {6, c6_f_monotone},
      {7, c7_local_bernoulli}, {8, c8_renorm},        {9, c9_embed_from_path},
      {10, c10_labels},        {12, c12_trend},       {13, c13_em},
      {11, c11_coupling},  // last: counts every coalescence run above
  };
  std::set<int> chosen;
  for (int i = 1; i < argc; ++i) chosen.insert(std::atoi(argv[i]));
  reset_coupling_audit();
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!chosen.empty() && !chosen.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " (" << fmt(secs)
              << " s) " << o.detail << std::endl;
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
