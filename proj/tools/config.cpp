#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <memory>
#include <sstream>

#include "voterperc/io.hpp"

namespace voterperc::cli {

const std::vector<OptionInfo>& option_table() {
  static const std::vector<OptionInfo> table = {
      {"d", "3", "lattice dimension"},
      {"R", "1", "voter range (l1)"},
      {"alpha", "0.5", "density"},
      {"L", "2", "base scale of the renormalisation ladder"},
      {"N", "1", "tree depth"},
      {"M", "8", "E_M box radius"},
      {"box", "16", "box size: window radius for sample, 2L of the threshold annulus, torus side for crossval"},
      {"samples", "0", "replicates (0: command default)"},
      {"seed", "1", "master seed"},
      {"eps_stop", "0.001", "coalescence stopping threshold (needs remeet_table)"},
      {"eps_trunc", "0.001", "escape radius target for h (needs remeet_table)"},
      {"p_star", "0.5", "threshold crossing level"},
      {"out", "", "output path"},
      {"workers", "1", "worker threads"},
      {"t_max", "200", "time cap of coalescence runs"},
      {"h_t_max", "1000000", "time cap of pair walks estimating h"},
      {"escape_factor", "8", "escape radius as a multiple of the separation"},
      {"horizon", "0", "finite time t; > 0 samples the voter model at time t"},
      {"sampler", "mu", "mu, bernoulli or finite_time"},
      {"R_list", "", "comma-separated ranges"},
      {"radii", "", "comma-separated distances"},
      {"grid", "", "comma-separated alpha grid"},
      {"beta", "0.5", "beta for the exponential bound"},
      {"level", "0.99", "confidence level"},
      {"tolerance", "0.01", "threshold CI width target"},
      {"n_max", "16000", "largest threshold sample bank"},
      {"family", "aligned", "embedding family: aligned or full"},
      {"remeet_table", "", "CSV written by the calibrate command"},
      {"direct_radius", "4", "h is estimated directly up to this distance"},
      {"n_h", "10000", "replicates per estimated h class"},
      {"check", "false", "exit 3 when a built-in check fails"},
  };
  return table;
}

std::string normalize_key(std::string key) {
  while (!key.empty() && key.front() == '-') key.erase(key.begin());
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("bad value for " + key + ": '" + text + "'");
  }
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<T>(key, item));
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (const auto& x : v) {
    if (!s.empty()) s += ',';
    if constexpr (std::is_floating_point_v<T>) {
      s += format_double(x);
    } else {
      s += std::to_string(x);
    }
  }
  return s;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("bad value for " + key + ": '" + text + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

RemeetTable load_table(const RunConfig& c) {
  RemeetTable t;
  try {
    t = RemeetTable::from_csv(read_text_file(c.remeet_table));
  } catch (const std::exception& e) {
    throw ConfigError("cannot load remeet_table " + c.remeet_table + ": " + e.what());
  }
  require(t.dim() == c.d && t.range() == c.R,
          "remeet_table was calibrated for d=" + std::to_string(t.dim()) +
              ", R=" + std::to_string(t.range()));
  return t;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    out[normalize_key(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig config_from_map(const std::map<std::string, std::string>& raw) {
  std::map<std::string, std::string> v;
  for (const auto& o : option_table()) v[o.key] = o.default_value;
  for (const auto& [k, val] : raw) {
    const std::string key = normalize_key(k);
    if (!v.count(key)) throw ConfigError("unknown config key: " + k);
    v[key] = val;
  }
  RunConfig c;
  c.d = parse_number<int>("d", v["d"]);
  c.R = parse_number<int>("R", v["R"]);
  c.alpha = parse_number<double>("alpha", v["alpha"]);
  c.L = parse_number<long>("L", v["L"]);
  c.N = parse_number<int>("N", v["N"]);
  c.M = parse_number<long>("M", v["M"]);
  c.box = parse_number<long>("box", v["box"]);
  c.samples = parse_number<std::uint64_t>("samples", v["samples"]);
  c.seed = parse_number<std::uint64_t>("seed", v["seed"]);
  c.eps_stop = parse_number<double>("eps_stop", v["eps_stop"]);
  c.eps_trunc = parse_number<double>("eps_trunc", v["eps_trunc"]);
  c.p_star = parse_number<double>("p_star", v["p_star"]);
  c.out = v["out"];
  c.workers = parse_number<unsigned>("workers", v["workers"]);
  c.t_max = parse_number<double>("t_max", v["t_max"]);
  c.h_t_max = parse_number<double>("h_t_max", v["h_t_max"]);
  c.escape_factor = parse_number<double>("escape_factor", v["escape_factor"]);
  c.horizon = parse_number<double>("horizon", v["horizon"]);
  c.sampler = trim(v["sampler"]);
  c.R_list = parse_list<int>("R_list", v["R_list"]);
  c.radii = parse_list<int>("radii", v["radii"]);
  c.grid = parse_list<double>("grid", v["grid"]);
  c.beta = parse_number<double>("beta", v["beta"]);
  c.level = parse_number<double>("level", v["level"]);
  c.tolerance = parse_number<double>("tolerance", v["tolerance"]);
  c.n_max = parse_number<std::uint64_t>("n_max", v["n_max"]);
  c.family = trim(v["family"]);
  c.remeet_table = trim(v["remeet_table"]);
  c.direct_radius = parse_number<int>("direct_radius", v["direct_radius"]);
  c.n_h = parse_number<std::uint64_t>("n_h", v["n_h"]);
  c.check = parse_bool("check", v["check"]);

  require(c.d >= 1 && c.d <= kMaxDim, "d must be in [1, 4]");
  require(c.R >= 1 && c.R <= 64, "R must be in [1, 64]");
  require(c.alpha >= 0.0 && c.alpha <= 1.0, "alpha must be in [0, 1]");
  require(c.L >= 1 && c.L <= 1000, "L must be in [1, 1000]");
  require(c.N >= 0 && c.N <= 12, "N must be in [0, 12]");
  require(c.M >= 1, "M must be >= 1");
  require(c.box >= 1 && c.box <= 512, "box must be in [1, 512]");
  require(c.eps_stop > 0.0 && c.eps_stop < 1.0, "eps_stop must be in (0, 1)");
  require(c.eps_trunc > 0.0 && c.eps_trunc < 1.0, "eps_trunc must be in (0, 1)");
  require(c.p_star > 0.0 && c.p_star < 1.0, "p_star must be in (0, 1)");
  require(c.workers >= 1 && c.workers <= 256, "workers must be in [1, 256]");
  require(c.t_max > 0.0, "t_max must be positive");
  require(c.h_t_max > 0.0, "h_t_max must be positive");
  require(c.escape_factor >= 1.0, "escape_factor must be >= 1");
  require(c.horizon >= 0.0, "horizon must be >= 0");
  require(c.sampler == "mu" || c.sampler == "bernoulli" || c.sampler == "finite_time",
          "sampler must be mu, bernoulli or finite_time");
  require(c.sampler != "finite_time" || c.horizon > 0.0,
          "sampler finite_time needs horizon > 0");
  for (int r : c.R_list) require(r >= 1 && r <= 64, "R_list entries must be in [1, 64]");
  for (int r : c.radii) require(r >= 1, "radii entries must be >= 1");
  require(std::is_sorted(c.grid.begin(), c.grid.end()), "grid must be sorted");
  for (double a : c.grid) require(a >= 0.0 && a <= 1.0, "grid entries must be in [0, 1]");
  require(c.beta > 0.0 && c.beta < 1.0, "beta must be in (0, 1)");
  require(c.level > 0.0 && c.level < 1.0, "level must be in (0, 1)");
  require(c.tolerance > 0.0, "tolerance must be positive");
  require(c.n_max >= 1, "n_max must be >= 1");
  require(c.family == "aligned" || c.family == "full", "family must be aligned or full");
  require(c.direct_radius >= 1, "direct_radius must be >= 1");
  require(c.n_h >= 1, "n_h must be >= 1");
  if (!c.remeet_table.empty()) load_table(c);
  return c;
}

std::map<std::string, std::string> RunConfig::to_map() const {
  auto m = echo();
  m["out"] = out;
  m["workers"] = std::to_string(workers);
  return m;
}

std::map<std::string, std::string> RunConfig::echo() const {
  return {{"d", std::to_string(d)},
          {"R", std::to_string(R)},
          {"alpha", format_double(alpha)},
          {"L", std::to_string(L)},
          {"N", std::to_string(N)},
          {"M", std::to_string(M)},
          {"box", std::to_string(box)},
          {"samples", std::to_string(samples)},
          {"seed", std::to_string(seed)},
          {"eps_stop", format_double(eps_stop)},
          {"eps_trunc", format_double(eps_trunc)},
          {"p_star", format_double(p_star)},
          {"t_max", format_double(t_max)},
          {"h_t_max", format_double(h_t_max)},
          {"escape_factor", format_double(escape_factor)},
          {"horizon", format_double(horizon)},
          {"sampler", sampler},
          {"R_list", join(R_list)},
          {"radii", join(radii)},
          {"grid", join(grid)},
          {"beta", format_double(beta)},
          {"level", format_double(level)},
          {"tolerance", format_double(tolerance)},
          {"n_max", std::to_string(n_max)},
          {"family", family},
          {"remeet_table", remeet_table},
          {"direct_radius", std::to_string(direct_radius)},
          {"n_h", std::to_string(n_h)},
          {"check", check ? "true" : "false"}};
}

TruncationPolicy RunConfig::truncation() const {
  TruncationPolicy t;
  t.t_max = h_t_max;
  t.escape_factor = escape_factor;
  if (!remeet_table.empty()) t.escape_radius = static_cast<double>(load_table(*this).escape_radius_for(eps_trunc));
  return t;
}

StoppingPolicy RunConfig::stopping() const {
  if (horizon > 0.0) return StoppingPolicy::at_time(horizon);
  StoppingPolicy p;
  p.eps_stop = eps_stop;
  p.truncation = truncation();
  p.truncation.t_max = t_max;
  if (!remeet_table.empty()) p.remeet = std::make_shared<const RemeetTable>(load_table(*this));
  return p;
}

}  // namespace voterperc::cli
