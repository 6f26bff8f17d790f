// Runs the command-line tool as a separate process.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path work(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tsfhn_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(TSFHN_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmall =
    "[experiment]\nkind = simulate-eps\npreset = ex2-step\nepsilon = 25,5\ninitial = seed\n"
    "[grid]\nhalf_length = 40\nn_x = 512\nn_y = 20\n"
    "[solver]\nt_end = 3\nobserve_every = 50\n"
    "[output]\nsample_every = 1\n";

}  // namespace

TEST_CASE("a passing run exits 0 and writes the artifact layout") {
  const fs::path dir = work("ok");
  const fs::path cfg = write(dir, kSmall);
  CHECK(cli("--config " + cfg.string() + " --out " + (dir / "out").string(), dir / "log") == 0);
  CHECK(fs::exists(dir / "out" / "manifest.txt"));
  CHECK(fs::exists(dir / "out" / "summary.csv"));
  CHECK(fs::exists(dir / "out" / "simulate-eps_ex2-step_25.csv"));
  CHECK(fs::exists(dir / "out" / "simulate-eps_ex2-step_5.csv"));
  const std::string log = slurp(dir / "log");
  CHECK(log.find("u_spread_across_eps  0  bound 1e-08  pass") != std::string::npos);
  CHECK(log.find("simulate-eps ex2-step") != std::string::npos);
}

TEST_CASE("quiet drops the progress notes but keeps the summary") {
  const fs::path dir = work("quiet");
  const fs::path cfg = write(dir, kSmall);
  CHECK(cli("--quiet --config " + cfg.string() + " --out " + (dir / "out").string(), dir / "log") == 0);
  const std::string log = slurp(dir / "log");
  CHECK(log.find("simulate-eps ex2-step") == std::string::npos);
  CHECK(log.find("growth_ratio_eps25") != std::string::npos);
}

TEST_CASE("output.dir is used without --out") {
  const fs::path dir = work("outdir");
  const fs::path cfg = write(dir, std::string(kSmall) + "dir = " + (dir / "from_config").string() + "\n");
  CHECK(cli("--quiet --config " + cfg.string(), dir / "log") == 0);
  CHECK(fs::exists(dir / "from_config" / "summary.csv"));
}

TEST_CASE("repeated runs give byte-identical CSVs") {
  const fs::path dir = work("repeat");
  const fs::path cfg = write(dir, kSmall);
  REQUIRE(cli("--quiet --config " + cfg.string() + " --out " + (dir / "a").string(), dir / "log") == 0);
  REQUIRE(cli("--quiet --config " + cfg.string() + " --out " + (dir / "b").string(), dir / "log") == 0);
  for (const char* f : {"simulate-eps_ex2-step_25.csv", "simulate-eps_ex2-step_5.csv", "summary.csv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
}

TEST_CASE("configuration errors exit 2 with a diagnostic") {
  const fs::path dir = work("bad");
  CHECK(cli("--config " + write(dir, "").string(), dir / "log") == 2);
  CHECK(slurp(dir / "log").find("experiment.kind") != std::string::npos);
  CHECK(cli("--config " + write(dir, "[experiment]\nkind = build-pulse\n[oops\n").string(), dir / "log") == 2);
  CHECK(slurp(dir / "log").find("line 3") != std::string::npos);
  CHECK(cli("--config " + write(dir, std::string(kSmall) + "colour = red\n").string(), dir / "log") == 2);
  CHECK(slurp(dir / "log").find("output.colour") != std::string::npos);
}

TEST_CASE("a failed module exits nonzero") {
  const fs::path dir = work("module");
  const fs::path cfg = write(dir, "[experiment]\nkind = verify-stability\npreset = ex3-contspec\n");
  CHECK(cli("--quiet --config " + cfg.string() + " --out " + (dir / "out").string(), dir / "log") == 1);
  CHECK(slurp(dir / "log").find("error:") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "summary.csv"));
}

TEST_CASE("missing or unreadable --config is a usage error") {
  const fs::path dir = work("usage");
  CHECK(cli("", dir / "log") != 0);
  CHECK(cli("--config " + (dir / "nope.ini").string(), dir / "log") != 0);
}
