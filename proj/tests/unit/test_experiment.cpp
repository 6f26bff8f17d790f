#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tsfhn/config.hpp"
#include "tsfhn/errors.hpp"
#include "tsfhn/experiment.hpp"

using namespace tsfhn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tsfhn_experiment_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

// small seeded runs that finish in well under a second
const char* kSmallEps =
    "[experiment]\nkind = simulate-eps\npreset = ex1-two-sines\nepsilon = 4,2\ninitial = seed\n"
    "[grid]\nhalf_length = 40\nn_x = 512\nn_y = 16\n"
    "[solver]\nt_end = 2\nobserve_every = 50\n"
    "[output]\nsample_every = 1\nx_stride = 8\n";

const char* kSmallTwoScale =
    "[experiment]\nkind = simulate-twoscale\npreset = ex2-step\ninitial = seed\n"
    "[grid]\nhalf_length = 40\nn_x = 512\nn_y = 20\n"
    "[solver]\nt_end = 2\nobserve_every = 50\n"
    "[output]\nsample_every = 1\nsnapshots = 2\n";

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("check relations") {
    CHECK(at_most("a", 1.0, 1.0).pass());
    CHECK_FALSE(at_most("a", 1.5, 1.0).pass());
    CHECK(at_least("a", 1.0, 1.0).pass());
    CHECK_FALSE(above("a", 0.0, 0.0).pass());
    CHECK(above("a", 1e-300, 0.0).pass());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(at_most("a", nan, 1.0).pass());
    CHECK_FALSE(above("a", nan, 0.0).pass());
    CHECK(info("a", nan).status() == "info");
    CHECK(at_most("a", 2.0, 1.0, false).status() == "waived");
    CHECK(at_most("a", 2.0, 1.0).status() == "fail");

    ExperimentResult r;
    r.checks = {at_most("a", 2.0, 1.0, false), info("b", 3.0)};
    CHECK(r.passed());
    r.checks.push_back(at_least("c", 0.0, 1.0));
    CHECK_FALSE(r.passed());
    r.checks.pop_back();
    r.error = "boom";
    CHECK_FALSE(r.passed());
  }

  TEST_CASE("lifted guiding components keep the macroscopic coupling") {
    // int alpha V dy = sum_i alpha_i v_i, which is what the guiding u-equation sees
    const auto cfg = parse_config("[experiment]\nkind = build-pulse\npreset = ex1-two-sines\n[grid]\nn_y = 32\n");
    const CellGrid cell(32);
    const MacroGrid grid(10.0, 64);
    const GuidingSetup setup = guiding_setup(cfg, cell);
    REQUIRE(setup.decomp);
    REQUIRE(setup.params.m == 2);
    std::vector<Field1D> v{Field1D::from_function(grid, [](double x) { return std::cos(x); }),
                           Field1D::from_function(grid, [](double x) { return 0.3 + x * x / 100.0; })};
    const TwoScaleField V = lift_guiding(v, setup, cfg.coeffs, cell);
    const Field1D coupling = V.cell_average(cfg.coeffs.alpha.sample(cell));
    for (std::size_t j = 0; j < grid.size(); ++j)
      CHECK(coupling[j] == doctest::Approx(setup.params.alpha[0] * v[0][j] + setup.params.alpha[1] * v[1][j]).epsilon(1e-13));
    CHECK_THROWS_AS(lift_guiding({v[0]}, setup, cfg.coeffs, cell), InvalidArgument);
  }

  TEST_CASE("single-mode override skips the decomposition") {
    const auto cfg = parse_config("[experiment]\nkind = simulate-eps\npreset = ex3-contspec\n");
    const CellGrid cell(cfg.grid.n_y);
    const GuidingSetup setup = guiding_setup(cfg, cell);
    CHECK_FALSE(setup.decomp);
    CHECK(setup.params.m == 1);
    CHECK(setup.params.beta[0] == 0.003);
    CHECK(setup.params.lambda[0] == 0.005);
  }

  TEST_CASE("simulate-eps artifacts") {
    const fs::path dir = scratch("eps");
    const auto res = run_experiment(parse_config(kSmallEps), {dir, nullptr});
    CHECK(res.error.empty());
    CHECK(res.passed());
    REQUIRE(res.files.size() == 2);
    CHECK(res.files[0] == "simulate-eps_ex1-two-sines_4.csv");
    CHECK(res.files[1] == "simulate-eps_ex1-two-sines_2.csv");
    CHECK(first_line(dir / res.files[0]) == "t,x,u,v");
    CHECK(first_line(dir / "summary.csv") == "name,value,bound,status");
    const std::string manifest = slurp(dir / "manifest.txt");
    CHECK(manifest.find("coefficients.f = u(1-u)(u-0.15)") != std::string::npos);
    CHECK(manifest.find("fft = fftw") != std::string::npos);
    CHECK(manifest.find("wall_seconds = ") != std::string::npos);
    CHECK(manifest.find("simulate-eps_ex1-two-sines_2.csv") != std::string::npos);

    // 5 observations, 64 written nodes each
    std::ifstream in(dir / res.files[0]);
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5 * 64);
    // 17 significant digits
    std::ifstream again(dir / res.files[0]);
    std::getline(again, line);
    std::getline(again, line);
    CHECK(line.substr(0, 4) == "0,-4");
  }

  TEST_CASE("identical configs give byte-identical CSVs") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const auto cfg = parse_config(kSmallTwoScale);
    const auto ra = run_experiment(cfg, {a, nullptr});
    const auto rb = run_experiment(cfg, {b, nullptr});
    REQUIRE(ra.files == rb.files);
    REQUIRE(ra.files.size() == 3);
    for (const auto& f : ra.files) CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  }

  TEST_CASE("two-scale snapshots and the companion guiding check") {
    const fs::path dir = scratch("twoscale");
    const auto res = run_experiment(parse_config(kSmallTwoScale), {dir, nullptr});
    CHECK(res.passed());
    CHECK(first_line(dir / "simulate-twoscale_ex2-step_none.csv") == "t,x,U,Vbar");
    CHECK(first_line(dir / "simulate-twoscale-snapshot_ex2-step_t1.csv") == "x,y,V");
    CHECK(fs::exists(dir / "simulate-twoscale-snapshot_ex2-step_t2.csv"));
    bool companion = false;
    for (const auto& c : res.checks)
      if (c.name == "cell_average_vs_guiding") {
        companion = true;
        CHECK(c.value < 1e-12);
      }
    CHECK(companion);
  }

  TEST_CASE("module errors end the run but still write the summary") {
    const fs::path dir = scratch("unsupported");
    const auto res = run_experiment(
        parse_config("[experiment]\nkind = verify-stability\npreset = ex3-contspec\n"), {dir, nullptr});
    CHECK_FALSE(res.passed());
    CHECK(res.error.find("decomposition") != std::string::npos);
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(slurp(dir / "manifest.txt").find("status = fail") != std::string::npos);
  }

  TEST_CASE("blow-up is reported with its time") {
    const fs::path dir = scratch("blowup");
    const auto res = run_experiment(
        parse_config("[experiment]\nkind = simulate-eps\npreset = ex1-two-sines\nepsilon = 2\ninitial = seed\n"
                     "[grid]\nhalf_length = 40\nn_x = 256\nn_y = 16\n"
                     "[solver]\ndt = 0.5\nt_end = 50\nobserve_every = 10\n[seed]\nheight = 5\n"),
        {dir, nullptr});
    CHECK_FALSE(res.passed());
    CHECK(res.error.find("t = ") != std::string::npos);
  }

  TEST_CASE("progress notes go to the log") {
    std::ostringstream log;
    run_experiment(parse_config(kSmallEps), {scratch("log"), &log});
    CHECK(log.str().find("simulate-eps ex1-two-sines") != std::string::npos);
  }
}
