#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "voterperc/coalescence.hpp"
#include "voterperc/walks.hpp"

namespace voterperc::cli {

// Invalid configuration: exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OptionInfo {
  std::string key;
  std::string default_value;
  std::string help;
};

// Every configurable key with its default, in display order.
const std::vector<OptionInfo>& option_table();

struct RunConfig {
  int d = 3;
  int R = 1;
  double alpha = 0.5;
  long L = 2;
  int N = 1;
  long M = 8;
  long box = 16;
  std::uint64_t samples = 0;  // 0: the command's own default
  std::uint64_t seed = 1;
  double eps_stop = 1e-3;
  double eps_trunc = 1e-3;
  double p_star = 0.5;
  std::string out;
  unsigned workers = 1;

  double t_max = 200.0;    // coalescence
  double h_t_max = 1.0e6;  // pair walks
  double escape_factor = 8.0;
  double horizon = 0.0;  // > 0: exact finite-time law at this t
  std::string sampler = "mu";
  std::vector<int> R_list;
  std::vector<int> radii;
  std::vector<double> grid;
  double beta = 0.5;
  double level = 0.99;
  double tolerance = 0.01;
  std::uint64_t n_max = 16000;
  std::string family = "aligned";
  std::string remeet_table;
  int direct_radius = 4;
  std::uint64_t n_h = 10000;
  bool check = false;

  // Canonical text form of every key.
  std::map<std::string, std::string> to_map() const;
  // The keys that determine results: everything except out and workers.
  std::map<std::string, std::string> echo() const;

  std::uint64_t samples_or(std::uint64_t fallback) const {
    return samples ? samples : fallback;
  }
  // Pair-walk truncation (h_t_max, escape rule).
  TruncationPolicy truncation() const;
  // Horizon policy when horizon > 0, else the truncated t -> infinity policy
  // (with the remeet table, if one is configured).
  StoppingPolicy stopping() const;
};

// Defaults, then `values` (unknown keys and bad values throw ConfigError).
// Keys may use '-' or '_'.
RunConfig config_from_map(const std::map<std::string, std::string>& values);

// key=value lines; blank lines and '#' comments ignored.
std::map<std::string, std::string> parse_config_text(const std::string& text);

std::string normalize_key(std::string key);

}  // namespace voterperc::cli
