#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "voterperc/io.hpp"

using namespace voterperc;
using namespace voterperc::cli;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("vmperc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(std::vector<std::string> args, std::string* log = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (log) *log = out.str() + err.str();
  return code;
}

}  // namespace

TEST_CASE("key normalisation and config text") {
  CHECK(normalize_key("--eps-stop") == "eps_stop");
  const auto m = parse_config_text("# comment\nalpha = 0.25\n\nR=3 # trailing\n");
  CHECK(m.at("alpha") == "0.25");
  CHECK(m.at("R") == "3");
  CHECK_THROWS_AS(parse_config_text("alpha"), ConfigError);
}

TEST_CASE("config validation") {
  CHECK(config_from_map({}).d == 3);
  CHECK_THROWS_AS(config_from_map({{"alpha", "1.3"}}), ConfigError);
  CHECK_THROWS_AS(config_from_map({{"bogus", "1"}}), ConfigError);
  CHECK_THROWS_AS(config_from_map({{"R", "x"}}), ConfigError);
  CHECK_THROWS_AS(config_from_map({{"sampler", "finite_time"}}), ConfigError);
  const auto c = config_from_map({{"radii", "1, 2,4"}, {"grid", "0.1,0.2"}});
  CHECK(c.radii == std::vector<int>{1, 2, 4});
  CHECK(c.grid.size() == 2);
  CHECK(c.echo().count("out") == 0);
  CHECK(c.echo().count("workers") == 0);
}

TEST_CASE("exit codes") {
  const auto dir = scratch_dir("exit");
  CHECK(run({"sample", "--alpha", "1.3", "--out", (dir / "x.json").string()}) == kExitConfig);
  CHECK(run({"sample", "--no-such-flag", "1"}) == kExitConfig);
  CHECK(run({"threshold", "--box", "5", "--out", (dir / "t.csv").string()}) == kExitRuntime);
  CHECK(run({"--help"}) == kExitOk);
}

TEST_CASE("sample output is byte-identical across runs and worker counts") {
  const auto dir = scratch_dir("sample");
  const auto a = (dir / "a.json").string(), b = (dir / "b.json").string();
  CHECK(run({"sample", "--box", "3", "--t-max", "20", "--seed", "5", "--out", a}) == kExitOk);
  CHECK(run({"sample", "--box", "3", "--t-max", "20", "--seed", "5", "--workers", "2", "--out", b}) ==
        kExitOk);
  CHECK(read_text_file(a) == read_text_file(b));
  CHECK(fs::exists(a + ".run.json"));
}

TEST_CASE("renorm enumerates the aligned family") {
  const auto dir = scratch_dir("renorm");
  std::string log;
  CHECK(run({"renorm", "--out", (dir / "r.csv").string()}, &log) == kExitOk);
  CHECK(log.find("count 2548") != std::string::npos);
}

TEST_CASE("config file with flag override") {
  const auto dir = scratch_dir("config");
  const auto cfg = (dir / "run.cfg").string();
  write_text_file(cfg, "alpha = 1.3\nbox = 2\nt_max = 10\n");
  const auto out = (dir / "s.json").string();
  CHECK(run({"sample", "--config", cfg, "--out", out}) == kExitConfig);
  CHECK(run({"sample", "--config", cfg, "--alpha", "0.4", "--out", out}) == kExitOk);
  CHECK(read_text_file(out).find("0.4") != std::string::npos);
}

TEST_CASE("covariance does not depend on the worker count") {
  const auto dir = scratch_dir("cov");
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  const std::vector<std::string> common{"covariance", "--samples", "1000", "--radii", "1,2",
                                        "--t-max", "20"};
  auto with = [&](const std::string& out, const std::string& w) {
    auto v = common;
    v.insert(v.end(), {"--out", out, "--workers", w});
    return v;
  };
  CHECK(run(with(a, "1")) == kExitOk);
  CHECK(run(with(b, "2")) == kExitOk);
  CHECK(read_text_file(a) == read_text_file(b));
}
