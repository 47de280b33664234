#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "voterperc/bounds.hpp"
#include "voterperc/lattice.hpp"
#include "voterperc/measure.hpp"

namespace voterperc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitCheck = 3;

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::string> files;
};

using Command = std::function<CommandResult(const RunConfig&, std::ostream&)>;

struct CommandInfo {
  std::string name;
  std::string help;
  std::string default_out;
  Command run;
};
const std::vector<CommandInfo>& commands();

CommandResult cmd_sample(const RunConfig& c, std::ostream& log);
CommandResult cmd_hscan(const RunConfig& c, std::ostream& log);
CommandResult cmd_bounds(const RunConfig& c, std::ostream& log);
CommandResult cmd_renorm(const RunConfig& c, std::ostream& log);
CommandResult cmd_threshold(const RunConfig& c, std::ostream& log);
CommandResult cmd_covariance(const RunConfig& c, std::ostream& log);
CommandResult cmd_crossval(const RunConfig& c, std::ostream& log);
CommandResult cmd_calibrate(const RunConfig& c, std::ostream& log);

// Parameter sets of the bound audits.
struct EtaCase {
  std::vector<Point> A;
  int R = 2;
  double beta = 0.5;
};
std::vector<EtaCase> standard_eta_batch();

struct DisjointlyCase {
  std::string event;  // "site1", "site0", "pair11", "pair10", "all", "crossing", "crossing3"
  std::vector<Point> shifts;
  int R = 2;
  double alpha = 0.5;
};
std::vector<DisjointlyCase> standard_disjointly_batch();
CylinderEvent make_event(const std::string& name, int d);

// <out>.run.json: version, command, config, workers, wall time, files.
std::string run_manifest(const std::string& command, const RunConfig& c,
                         double wall_seconds, const CommandResult& r);

// Full pipeline: flags and config file to exit code. `args` excludes the
// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace voterperc::cli
