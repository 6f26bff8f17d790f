#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tsfhn/errors.hpp"
#include "tsfhn/presets.hpp"
#include "tsfhn/simulators.hpp"
#include "tsfhn/verify.hpp"

using namespace tsfhn;

namespace {

SolverConfig config(double t_end, std::size_t every = 10, double dt = 0.01) {
  SolverConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.observe_every = every;
  return c;
}

Field1D bump(const MacroGrid& g) {
  return Field1D::from_function(g, [](double x) { return std::exp(-x * x / 16.0); });
}

}  // namespace

TEST_SUITE("simulators") {
  TEST_CASE("config validation") {
    CHECK_NOTHROW(config(1.0).validate());
    CHECK_THROWS_AS(config(1.005).validate(), ValidationError);
    CHECK_THROWS_AS(config(1.0, 30).validate(), ValidationError);
    CHECK_THROWS_AS(config(1.0, 10, 0.0).validate(), ValidationError);
    CHECK_THROWS_AS(config(-1.0).validate(), ValidationError);
    CHECK(config(2.0).steps() == 200);
  }

  TEST_CASE("rest state is fixed for every preset") {
    MacroGrid g(40.0, 256);
    CellGrid cell(32);
    for (const auto& name : preset_names()) {
      auto c = preset_coefficients(name);
      auto cfg = config(1.0);
      EpsState e{0.0, 2.0, Field1D(g), Field1D(g)};
      EpsSolver es(g, c, 2.0, cfg);
      run<EpsState>(e, es, cfg, nullptr);
      CHECK(e.sup_norm() == 0.0);
      TwoScaleState t{0.0, Field1D(g), TwoScaleField(g, cell)};
      TwoScaleSolver ts(g, cell, c, cfg);
      run<TwoScaleState>(t, ts, cfg, nullptr);
      CHECK(t.sup_norm() == 0.0);
      CHECK(t.t == doctest::Approx(1.0));
    }
  }

  TEST_CASE("t_end = 0 observes only the initial state") {
    MacroGrid g(10.0, 64);
    auto c = preset_coefficients("ex1-two-sines");
    auto cfg = config(0.0);
    EpsState e{0.0, 1.0, bump(g), Field1D(g)};
    EpsSolver es(g, c, 1.0, cfg);
    int seen = 0;
    run<EpsState>(e, es, cfg, [&](const EpsState&) { ++seen; });
    CHECK(seen == 1);
    CHECK(e.u[32] == bump(g)[32]);
  }

  TEST_CASE("y-independent coefficients make both systems agree") {
    // With alpha, beta, b constant the two-scale V stays y-independent and
    // equals the eps-system v for any eps.
    auto c = preset_coefficients("ex1-two-sines");
    c.alpha = CellFunction::constant(1.0);
    c.beta = CellFunction::constant(0.01);
    c.b = CellFunction::constant(0.02);
    c.d = CellFunction::constant(0.0);
    MacroGrid g(30.0, 512);
    CellGrid cell(16);
    auto cfg = config(5.0, 100);
    EpsState e{0.0, 0.7, bump(g), Field1D(g)};
    EpsSolver es(g, c, 0.7, cfg);
    run<EpsState>(e, es, cfg, nullptr);
    TwoScaleState t{0.0, bump(g), TwoScaleField(g, cell)};
    TwoScaleSolver ts(g, cell, c, cfg);
    run<TwoScaleState>(t, ts, cfg, nullptr);
    CHECK(linf_norm(e.u - t.U) < 1e-13);
    CHECK(linf_norm(e.v - reconstruct(t.V, 0.7)) < 1e-13);
  }

  TEST_CASE("halving dt halves the time error") {
    auto c = preset_coefficients("ex1-two-sines");
    MacroGrid g(30.0, 512);
    auto solve = [&](double dt) {
      auto cfg = config(2.0, 1, dt);
      EpsState e{0.0, 1.0, bump(g), Field1D(g)};
      EpsSolver es(g, c, 1.0, cfg);
      run<EpsState>(e, es, cfg, nullptr);
      return e.u;
    };
    const auto coarse = solve(0.02), mid = solve(0.01), fine = solve(0.005);
    const double ratio = linf_norm(coarse - mid) / linf_norm(mid - fine);
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.5);
  }

  TEST_CASE("two-scale runs are deterministic and keep zero cell average on ex1") {
    auto c = preset_coefficients("ex1-two-sines");
    MacroGrid g(30.0, 256);
    CellGrid cell(32);
    auto cfg = config(2.0, 50);
    auto go = [&]() {
      TwoScaleState t{0.0, bump(g), TwoScaleField(g, cell)};
      TwoScaleSolver ts(g, cell, c, cfg);
      double avg = 0.0;
      run<TwoScaleState>(t, ts, cfg, [&](const TwoScaleState& s) { avg = std::max(avg, linf_norm(s.V.cell_average())); });
      CHECK(avg < 1e-17);
      return t;
    };
    auto a = go(), b = go();
    CHECK(std::equal(a.V.values().begin(), a.V.values().end(), b.V.values().begin()));
    CHECK(linf_norm(a.V.cell_l2_norm()) > 0.0);
  }

  TEST_CASE("variable b in the cell uses the explicit path") {
    auto c = preset_coefficients("ex3-contspec");
    MacroGrid g(30.0, 256);
    CellGrid cell(32);
    auto cfg = config(1.0, 100);
    TwoScaleState t{0.0, bump(g), TwoScaleField(g, cell)};
    TwoScaleSolver ts(g, cell, c, cfg);
    run<TwoScaleState>(t, ts, cfg, nullptr);
    // V = beta int U: y-independent since beta is constant, and positive.
    CHECK(t.V(128, 3) == doctest::Approx(t.V(128, 20)).epsilon(1e-2));
    CHECK(t.V(128, 3) > 0.0);
  }

  TEST_CASE("blow-up ceiling") {
    auto c = preset_coefficients("ex1-two-sines");
    MacroGrid g(10.0, 64);
    auto cfg = config(10.0, 10, 0.5);
    EpsState e{0.0, 1.0, Field1D(g, std::vector<double>(64, 3.0)), Field1D(g)};
    EpsSolver es(g, c, 1.0, cfg);
    CHECK_THROWS_AS(run<EpsState>(e, es, cfg, nullptr), BlowUp);
  }
}
