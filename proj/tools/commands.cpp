#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <map>
#include <memory>
#include <ostream>

#include "voterperc/io.hpp"
#include "voterperc/renorm.hpp"
#include "voterperc/threshold.hpp"
#include "voterperc/walks.hpp"

namespace voterperc::cli {

namespace {

Point on_axis(int d, int r, int axis = 0) { return Point::unit(d, axis).scaled(r); }

std::vector<std::string> comments_for(const std::string& command, const RunConfig& c) {
  auto out = header_comments(c.echo(), c.seed);
  out.insert(out.begin() + 1, "command " + command);
  return out;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + suffix;
  }
  return path.substr(0, dot) + suffix + path.substr(dot);
}

void emit(CommandResult& r, const std::string& path, const std::string& text,
          std::ostream& log) {
  write_text_file(path, text);
  r.files.push_back(path);
  log << "wrote " << path << '\n';
}

void require_d3(const RunConfig& c, const std::string& what) {
  if (c.d != 3) throw ConfigError(what + " is defined for d = 3");
}

}  // namespace

CommandResult cmd_sample(const RunConfig& c, std::ostream& log) {
  CommandResult res;
  const BoxSpec window = linf_box(Point::zero(c.d), static_cast<int>(c.box));
  const std::uint64_t n = c.samples_or(1);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t s = derive_seed(c.seed, i);
    FieldSample xi;
    if (c.sampler == "bernoulli") {
      xi = sample_bernoulli(window, c.alpha, s);
    } else if (c.sampler == "finite_time") {
      xi = sample_mu_finite_time(window, c.alpha, c.R, c.horizon, s);
    } else {
      xi = sample_mu(window, c.alpha, c.R, c.stopping(), s);
    }
    const std::string path = n == 1 ? c.out : with_suffix(c.out, "_" + std::to_string(i));
    emit(res, path, field_to_json(xi, c.echo()), log);
  }
  return res;
}

CommandResult cmd_hscan(const RunConfig& c, std::ostream& log) {
  CommandResult res;
  const ParallelMap pool(c.workers);
  const std::vector<int> Rs = c.R_list.empty() ? std::vector<int>{c.R} : c.R_list;
  const std::vector<int> radii = c.radii.empty() ? std::vector<int>{2, 4, 8, 16} : c.radii;
  const std::uint64_t n = c.samples_or(10000);
  const TruncationPolicy policy = c.truncation();

  CsvTable t;
  t.comments = comments_for("hscan", c);
  t.comments.push_back("h estimates are biased downward by truncation: " + policy.describe());
  t.header = {"R",  "r",   "estimate", "stderr",  "ci_lo",    "ci_hi",
              "n",  "met", "escaped",  "timed_out", "scaled", "scaled_hi"};
  for (int R : Rs) {
    std::vector<double> xs, ys;
    double f = 0.0, f_hi = 0.0;
    for (int r : radii) {
      const auto e = estimate_h(Point::zero(c.d), on_axis(c.d, r), R, n, policy,
                                derive_seed(derive_seed(c.seed, R), r), pool, c.level);
      const double w = std::pow(static_cast<double>(r), c.d - 2);
      const double scaled = e.estimate.estimate * w, scaled_hi = e.estimate.ci_hi * w;
      f = std::max(f, scaled);
      f_hi = std::max(f_hi, scaled_hi);
      if (e.estimate.estimate > 0.0) {
        xs.push_back(r);
        ys.push_back(e.estimate.estimate);
      }
      std::vector<std::string> row{std::to_string(R), std::to_string(r)};
      for (auto& s : estimate_columns(e.estimate)) row.push_back(std::move(s));
      row.insert(row.end(), {std::to_string(e.met), std::to_string(e.escaped),
                             std::to_string(e.timed_out), format_double(scaled),
                             format_double(scaled_hi)});
      t.add_row(std::move(row));
      log << "R=" << R << " r=" << r << " h=" << format_double(e.estimate.estimate) << '\n';
    }
    std::string summary = "R=" + std::to_string(R) + " f_hat=" + format_double(f) +
                          " f_hi=" + format_double(f_hi);
    if (xs.size() >= 2) summary += " loglog_slope=" + format_double(loglog_slope(xs, ys));
    t.comments.push_back(summary);
    log << summary << '\n';
  }
  emit(res, c.out, t.to_string(), log);
  return res;
}

std::vector<EtaCase> standard_eta_batch() {
  const Point o = Point::zero(3), e1 = on_axis(3, 1), e2 = on_axis(3, 1, 1),
              e3 = on_axis(3, 1, 2);
  const std::vector<Point> A2{o, e1}, A3{o, e1, e2}, A4{o, e1, e2, e3};
  return {{A2, 2, 0.3},
          {A2, 4, 0.5},
          {A2, 2, 0.8},
          {{o, on_axis(3, 2)}, 4, 0.5},
          {A3, 2, 0.5},
          {A3, 4, 0.3},
          {A3, 4, 0.8},
          {A4, 2, 0.3},
          {A4, 4, 0.5},
          {A4, 2, 0.8}};
}

std::vector<DisjointlyCase> standard_disjointly_batch() {
  const Point o = Point::zero(3);
  auto x = [](int r) { return on_axis(3, r); };
  auto y = [](int r) { return on_axis(3, r, 1); };
  return {{"site1", {o}, 2, 0.4},
          {"site1", {o}, 2, 0.6},
          {"all", {o, x(5)}, 2, 0.4},
          {"site1", {o, x(1)}, 2, 0.4},
          {"site0", {o, x(1), y(1)}, 2, 0.6},
          {"pair11", {o, x(3)}, 2, 0.6},
          {"pair10", {o, y(2)}, 2, 0.4},
          {"crossing", {o, x(5), x(10)}, 2, 0.4},
          {"crossing", {o, x(5), x(10)}, 2, 0.6},
          {"crossing3", {o, x(7), y(7)}, 2, 0.4}};
}

CylinderEvent make_event(const std::string& name, int d) {
  const Point o = Point::zero(d), e1 = on_axis(d, 1);
  if (name == "site1") return CylinderEvent::pattern({o}, {1});
  if (name == "site0") return CylinderEvent::pattern({o}, {0});
  if (name == "pair11") return CylinderEvent::pattern({o, e1}, {1, 1});
  if (name == "pair10") return CylinderEvent::pattern({o, e1}, {1, 0});
  if (name == "all") return CylinderEvent::everything(d);
  if (name == "crossing") return annulus_crossing_event(d, 1, 2);
  if (name == "crossing3") return annulus_crossing_event(d, 1, 3);
  throw std::invalid_argument("unknown event " + name);
}

CommandResult cmd_bounds(const RunConfig& c, std::ostream& log) {
  require_d3(c, "the standard bounds batch");
  CommandResult res;
  const ParallelMap pool(c.workers);
  const std::uint64_t n = c.samples_or(100000);
  const StoppingPolicy policy = c.stopping();
  std::map<int, std::unique_ptr<MeetingProbabilityCache>> caches;
  auto cache = [&](int R) -> MeetingProbabilityCache& {
    auto& p = caches[R];
    if (!p) {
      p = std::make_unique<MeetingProbabilityCache>(
          c.d, R, c.n_h, c.truncation(), derive_seed(c.seed, 1000 + R), c.direct_radius, pool);
    }
    return *p;
  };
  std::vector<InequalityReport> reports;
  std::uint64_t id = 0;
  auto failing = [](const std::string& what, const std::exception& e) {
    return std::runtime_error(what + ": " + e.what());
  };
  for (const auto& k : standard_eta_batch()) {
    try {
      reports.push_back(check_exponential_eta(k.A, k.R, k.beta, n, policy, cache(k.R),
                                              derive_seed(c.seed, id++), pool, c.level));
    } catch (const std::exception& e) {
      throw failing("exponential_eta R=" + std::to_string(k.R) + " beta=" + format_double(k.beta), e);
    }
    log << "exponential_eta " << reports.back().params.at("A") << " -> "
        << to_string(reports.back().verdict) << '\n';
  }
  for (const auto& k : standard_disjointly_batch()) {
    try {
      reports.push_back(check_disjointly(make_event(k.event, c.d), k.shifts, k.alpha, k.R, n,
                                         policy, cache(k.R), derive_seed(c.seed, id++), pool,
                                         100000, c.level));
    } catch (const std::exception& e) {
      throw failing("disjointly " + k.event + " R=" + std::to_string(k.R) +
                        " alpha=" + format_double(k.alpha), e);
    }
    log << "disjointly " << k.event << " -> " << to_string(reports.back().verdict) << '\n';
  }
  const auto fails = std::count_if(reports.begin(), reports.end(),
                                   [](const auto& r) { return r.verdict == Verdict::kFail; });
  auto comments = comments_for("bounds", c);
  comments.push_back("verdict: pass iff lhs_ci_hi <= rhs_lo; fail iff lhs_ci_lo > rhs_hi");
  emit(res, c.out, reports_to_csv(reports, comments), log);
  log << fails << " fail verdicts\n";
  if (c.check && fails > 0) res.exit_code = kExitCheck;
  return res;
}

CommandResult cmd_renorm(const RunConfig& c, std::ostream& log) {
  CommandResult res;
  const EmbeddingFamily family =
      c.family == "full" ? EmbeddingFamily::kFull : EmbeddingFamily::kLatticeAligned;
  PairSumEvaluator eval(c.d, c.L);
  CsvTable t;
  t.header = {"id",          "valid",        "disjoint",      "sparsity_pass",
              "worst_count", "worst_leaf",   "worst_k",       "worst_bound",
              "relaxed_pass", "pair_sum",    "pair_bound",    "pair_pass"};
  bool all_ok = true;
  std::uint64_t id = 0;
  auto audit = [&](const ProperEmbedding& T) {
    const bool valid = validate_embedding(T);
    const bool disjoint = leaf_boxes_disjoint(T);
    bool sparse = true, relaxed = true;
    SparsityAuditRow worst;
    double worst_ratio = -1.0;
    for (const auto& row : sparsity_audit(T, std::max(1, T.N))) {
      sparse = sparse && row.result.pass;
      relaxed = relaxed && row.result.count <= (std::uint64_t{1} << row.k);
      const double ratio = static_cast<double>(row.result.count) /
                           static_cast<double>(row.result.bound);
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst = row;
      }
    }
    const PairSumResult ps = check_pair_sum(T, eval);
    all_ok = all_ok && valid && disjoint && sparse && ps.pass;
    t.add_row({std::to_string(id++), valid ? "1" : "0", disjoint ? "1" : "0",
               sparse ? "1" : "0", std::to_string(worst.result.count),
               std::to_string(worst.leaf), std::to_string(worst.k),
               std::to_string(worst.result.bound), relaxed ? "1" : "0",
               format_double(ps.sum), format_double(ps.bound), ps.pass ? "1" : "0"});
  };
  std::string count;
  const long double total = embedding_count(c.N, c.d, family);
  if (c.samples == 0 && total <= static_cast<long double>(kEnumerationGuard)) {
    count = std::to_string(enumerate_embeddings(c.N, c.d, c.L, audit, family));
  } else {
    const std::uint64_t n = c.samples_or(10000);
    for (std::uint64_t i = 0; i < n; ++i) {
      Rng rng = make_stream(c.seed, i);
      audit(random_embedding(c.N, c.d, c.L, rng, family));
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6Le", total);
    count = buf;
    log << "audited " << n << " random embeddings\n";
  }
  log << "count " << count << '\n';
  const auto k = pair_sum_constants(c.d, c.L);
  t.comments = comments_for("renorm", c);
  t.comments.push_back("family " + to_string(family));
  t.comments.push_back("count " + count);
  t.comments.push_back("C " + format_double(k.C) + " C'' " + format_double(k.C2) + " C' " +
                       format_double(k.Cprime));
  t.comments.push_back("sparsity bound 2^(k-1); relaxed_pass uses 2^k");
  emit(res, c.out, t.to_string(), log);
  if (c.check && !all_ok) res.exit_code = kExitCheck;
  return res;
}

CommandResult cmd_threshold(const RunConfig& c, std::ostream& log) {
  CommandResult res;
  const ParallelMap pool(c.workers);
  const std::vector<int> Rs = c.R_list.empty() ? std::vector<int>{1, 4, 16} : c.R_list;
  ThresholdSchedule schedule;
  schedule.n_initial = c.samples_or(2000);
  schedule.n_max = std::max(c.n_max, schedule.n_initial);
  const StoppingPolicy policy = c.stopping();
  const TrendReport rep = theorem_trend_report(c.d, Rs, c.box, c.p_star, c.tolerance,
                                               schedule, policy, c.seed, pool, c.level);
  auto comments = comments_for("threshold", c);
  comments.push_back("mu sampler stopping: " + policy.describe());
  emit(res, c.out, trend_csv(rep, comments), log);
  bool ok = rep.pc.pinned == "none";
  emit(res, with_suffix(c.out, ".trace.bernoulli"), trace_csv(rep.pc, comments), log);
  for (const auto& row : rep.rows) {
    ok = ok && row.alpha_c.pinned == "none" && row.alpha_c.alpha_hat > 0.0 &&
         row.alpha_c.alpha_hat < 1.0;
    emit(res, with_suffix(c.out, ".trace." + row.alpha_c.sampler_id),
         trace_csv(row.alpha_c, comments), log);
    log << "R=" << row.R << " alpha_c=" << format_double(row.alpha_c.alpha_hat)
        << " gap=" << format_double(row.gap) << '\n';
  }
  log << "p_c(box " << c.box << ")=" << format_double(rep.pc.alpha_hat) << '\n';
  if (!c.grid.empty()) {
    const AnnulusSpec a = AnnulusSpec::from_box(c.d, c.box);
    std::vector<ThresholdSampler> samplers{bernoulli_threshold_sampler(a)};
    for (int R : Rs) samplers.push_back(mu_threshold_sampler(a, R, policy));
    for (std::size_t j = 0; j < samplers.size(); ++j) {
      const auto curve = crossing_curve(samplers[j], a, c.grid, schedule.n_initial,
                                        derive_seed(c.seed, 5000 + j), CurveMode::kCoupled,
                                        pool, c.level);
      emit(res, with_suffix(c.out, ".curve." + samplers[j].id), curve_csv(curve, comments),
           log);
    }
  }
  if (c.check && !ok) res.exit_code = kExitCheck;
  return res;
}

CommandResult cmd_covariance(const RunConfig& c, std::ostream& log) {
  CommandResult res;
  const ParallelMap pool(c.workers);
  const std::vector<int> Rs = c.R_list.empty() ? std::vector<int>{c.R} : c.R_list;
  const std::vector<int> radii = c.radii.empty() ? std::vector<int>{1, 2, 4, 8} : c.radii;
  const std::uint64_t n = c.samples_or(10000);
  const StoppingPolicy policy = c.stopping();
  CsvTable t;
  t.comments = comments_for("covariance", c);
  t.comments.push_back("stopping: " + policy.describe());
  t.header = {"R",          "r",          "estimate", "stderr", "ci_lo",  "ci_hi",   "n",
              "via_joint", "via_centred", "mean_x",  "mean_y", "tv",     "tv_ci_lo", "tv_ci_hi"};
  using Cells = std::array<std::uint64_t, 4>;
  for (int R : Rs) {
    for (int r : radii) {
      const std::vector<Point> sites{Point::zero(c.d), on_axis(c.d, r)};
      const FieldSampler draw = mu_sampler(sites, c.alpha, R, policy);
      const std::uint64_t seed = derive_seed(derive_seed(c.seed, R), r);
      const Cells cells = pool.map_reduce(
          n, Cells{},
          [&](std::size_t i) {
            const FieldSample xi = draw(derive_seed(seed, i));
            Cells one{};
            ++one[xi.at(sites[0]) | (xi.at(sites[1]) << 1)];
            return one;
          },
          [](Cells& a, const Cells& b) {
            for (int k = 0; k < 4; ++k) a[k] += b[k];
          });
      const auto cov = covariance_from_counts(n, cells[1] + cells[3], cells[2] + cells[3],
                                              cells[3], c.level);
      const auto tv = tv_to_product(cells, 2, c.alpha, c.level);
      std::vector<std::string> row{std::to_string(R), std::to_string(r)};
      for (auto& s : estimate_columns(cov.covariance)) row.push_back(std::move(s));
      row.insert(row.end(), {format_double(cov.via_joint), format_double(cov.via_centred),
                             format_double(cov.mean_x), format_double(cov.mean_y),
                             format_double(tv.estimate), format_double(tv.ci_lo),
                             format_double(tv.ci_hi)});
      t.add_row(std::move(row));
      log << "R=" << R << " r=" << r << " cov=" << format_double(cov.covariance.estimate)
          << " tv=" << format_double(tv.estimate) << '\n';
    }
  }
  emit(res, c.out, t.to_string(), log);
  return res;
}

CommandResult cmd_crossval(const RunConfig& c, std::ostream& log) {
  CommandResult res;
  const ParallelMap pool(c.workers);
  const double t_end = c.horizon > 0.0 ? c.horizon : 5.0;
  const std::uint64_t n = c.samples_or(10000);
  const int side = static_cast<int>(c.box);
  if (side < 4) throw ConfigError("crossval needs a torus side (box) >= 4");
  const Point o = Point::zero(c.d), e1 = on_axis(c.d, 1);
  using Tally = std::array<std::uint64_t, 3>;  // xi(0)=1, xi(e1)=1, both
  auto tally = [&](const FieldSampler& draw, std::uint64_t seed) {
    return pool.map_reduce(
        n, Tally{},
        [&](std::size_t i) {
          const FieldSample xi = draw(derive_seed(seed, i));
          const std::uint64_t a = xi.at(o), b = xi.at(e1);
          return Tally{a, b, a & b};
        },
        [](Tally& x, const Tally& y) {
          for (int k = 0; k < 3; ++k) x[k] += y[k];
        });
  };
  const Tally fwd = tally(torus_sampler(side, c.d, c.alpha, c.R, t_end, 1),
                          derive_seed(c.seed, 1));
  const Tally dual = tally(finite_time_sampler(linf_box(o, 1).points(), c.alpha, c.R, t_end),
                           derive_seed(c.seed, 2));
  CsvTable t;
  t.comments = comments_for("crossval", c);
  t.comments.push_back("forward torus side " + std::to_string(side) + " vs duality at t=" +
                       format_double(t_end) + "; agree iff |diff| <= 3 combined sigma");
  t.header = {"quantity", "forward", "forward_stderr", "duality", "duality_stderr",
              "z", "agree"};
  const char* names[3] = {"p(xi(0)=1)", "p(xi(e1)=1)", "p(xi(0)=xi(e1)=1)"};
  bool all = true;
  for (int k = 0; k < 3; ++k) {
    const auto a = proportion_estimate(fwd[k], n, c.level);
    const auto b = proportion_estimate(dual[k], n, c.level);
    const double se = std::hypot(a.std_error, b.std_error);
    const double z = se > 0.0 ? std::abs(a.estimate - b.estimate) / se
                              : (a.estimate == b.estimate ? 0.0 : INFINITY);
    const bool agree = z <= 3.0;
    all = all && agree;
    t.add_row({names[k], format_double(a.estimate), format_double(a.std_error),
               format_double(b.estimate), format_double(b.std_error), format_double(z),
               agree ? "1" : "0"});
    log << names[k] << " forward=" << format_double(a.estimate)
        << " duality=" << format_double(b.estimate) << " z=" << format_double(z) << '\n';
  }
  emit(res, c.out, t.to_string(), log);
  if (c.check && !all) res.exit_code = kExitCheck;
  return res;
}

CommandResult cmd_calibrate(const RunConfig& c, std::ostream& log) {
  CommandResult res;
  const ParallelMap pool(c.workers);
  const std::vector<int> radii =
      c.radii.empty() ? std::vector<int>{1, 2, 4, 8, 16, 32} : c.radii;
  const RemeetTable table = calibrate_remeet(c.d, c.R, radii, c.samples_or(10000),
                                             c.truncation(), c.seed, pool);
  emit(res, c.out, table.to_csv(), log);
  return res;
}

const std::vector<CommandInfo>& commands() {
  static const std::vector<CommandInfo> list = {
      {"sample", "draw fields on B(box) and write them as JSON", "sample.json", cmd_sample},
      {"hscan", "meeting probabilities h_R(0, r e1) and f(R)", "hscan.csv", cmd_hscan},
      {"bounds", "audit the two correlation inequalities on the standard batch",
       "bounds.csv", cmd_bounds},
      {"renorm", "enumerate or sample proper embeddings and audit them", "renorm.csv",
       cmd_renorm},
      {"threshold", "critical density trend against the product measure", "threshold.csv",
       cmd_threshold},
      {"covariance", "two-point covariance and local product-law distance",
       "covariance.csv", cmd_covariance},
      {"crossval", "forward torus dynamics against the finite-time dual", "crossval.csv",
       cmd_crossval},
      {"calibrate", "re-meeting table used by eps_stop and eps_trunc", "remeet.csv",
       cmd_calibrate},
  };
  return list;
}

std::string run_manifest(const std::string& command, const RunConfig& c,
                         double wall_seconds, const CommandResult& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = c.to_map();
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["wall_time_s"] = wall_seconds;
  j["exit_code"] = r.exit_code;
  j["files"] = r.files;
  return j.dump(1) + '\n';
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Voter-model percolation toolkit", "vmperc"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  std::string config_path;
  bool check = false;
  app.add_option("--config", config_path, "key=value file; flags override it");
  CLI::Option* check_flag = app.add_flag("--check", check, "exit 3 when a built-in check fails");
  for (const auto& o : option_table()) {
    if (o.key == "check") continue;
    std::string names = "--" + o.key;
    std::string dashed = o.key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (dashed != o.key) names += ",--" + dashed;
    flag_options[o.key] = app.add_option(names, flag_values[o.key], o.help);
  }
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands()) {
    subs[cmd.name] = app.add_subcommand(cmd.name, cmd.help)->fallthrough();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const CommandInfo* chosen = nullptr;
  for (const auto& cmd : commands()) {
    if (subs[cmd.name]->parsed()) chosen = &cmd;
  }
  RunConfig config;
  try {
    std::map<std::string, std::string> values;
    if (!config_path.empty()) {
      std::string text;
      try {
        text = read_text_file(config_path);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("cannot read config file: ") + e.what());
      }
      values = parse_config_text(text);
    }
    for (const auto& [key, opt] : flag_options) {
      if (opt->count() > 0) values[key] = flag_values[key];
    }
    if (check_flag->count() > 0) values["check"] = check ? "true" : "false";
    config = config_from_map(values);
    if (config.out.empty()) config.out = chosen->default_out;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    CommandResult r = chosen->run(config, out);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text_file(config.out + ".run.json", run_manifest(chosen->name, config, wall, r));
    return r.exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error in " << chosen->name << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace voterperc::cli
