#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tsfhn/errors.hpp"
#include "tsfhn/presets.hpp"
#include "tsfhn/spectral.hpp"
#include "tsfhn/verify.hpp"

using namespace tsfhn;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_abs_diff(const TwoScaleField& a, const TwoScaleField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

double l2_diff(const TwoScaleField& a, const TwoScaleField& b) {
  TwoScaleField d = a;
  d -= b;
  return l2_norm(d);
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("reconstruct of y-independent data is the macro profile") {
    MacroGrid g(20.0, 512);
    CellGrid cell(32);
    auto V = TwoScaleField::from_function(g, cell, [](double x, double) { return std::cos(x); });
    auto r = reconstruct(V, 0.37);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(r[j] == std::cos(g.x(j)));
  }

  TEST_CASE("reconstruct hits cell nodes exactly when commensurate") {
    MacroGrid g(8.0, 256);  // dx = 1/16
    CellGrid cell(16);
    auto V = TwoScaleField::from_function(g, cell, [](double x, double y) { return std::exp(-x * x) * std::sin(kTwoPi * y); });
    auto r = reconstruct(V, 1.0);
    for (std::size_t j = 0; j < g.size(); ++j)
      CHECK(std::abs(r[j] - std::exp(-g.x(j) * g.x(j)) * std::sin(kTwoPi * g.x(j))) < 1e-14);

    // R(alpha V) = alpha_eps R(V)
    auto coeffs = preset_coefficients("ex1-two-sines");
    auto aV = V;
    for (std::size_t j = 0; j < g.size(); ++j)
      for (std::size_t k = 0; k < cell.size(); ++k) aV(j, k) *= coeffs.alpha(cell.y(k));
    auto lhs = reconstruct(aV, 1.0);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(lhs[j] - coeffs.alpha(g.x(j)) * r[j]) < 1e-12);
  }

  TEST_CASE("reconstruct interpolation error is second order in dy") {
    MacroGrid g(10.0, 1000);
    auto f = [](double x, double y) { return std::exp(-x * x / 20.0) * std::sin(kTwoPi * y); };
    double prev = 0.0;
    for (std::size_t ny : {32, 64}) {
      auto V = TwoScaleField::from_function(g, CellGrid(ny), f);
      auto r = reconstruct(V, 0.731);
      double err = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(r[j] - f(g.x(j), g.x(j) / 0.731)));
      if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
      prev = err;
    }
  }

  TEST_CASE("unfold") {
    MacroGrid g(8.0, 256);
    CellGrid cell(16);
    Field1D c(g, std::vector<double>(g.size(), 2.5));
    const auto uc = unfold(c, 0.3, cell);
    for (double v : uc.values()) CHECK(v == 2.5);

    auto s = Field1D::from_function(g, [](double x) { return std::sin(kTwoPi * x); });
    auto T = unfold(s, 1.0, cell);
    auto expect = TwoScaleField::from_function(g, cell, [](double, double y) { return std::sin(kTwoPi * y); });
    CHECK(max_abs_diff(T, expect) < 1e-13);
  }

  TEST_CASE("unfold preserves the L2 norm") {
    MacroGrid g(20.0, 4096);
    CellGrid cell(64);
    auto v = Field1D::from_function(g, [](double x) { return std::exp(-x * x / 4.0); });
    for (double eps : {1.0, 0.5, 0.13}) CHECK(l2_norm(unfold(v, eps, cell)) == doctest::Approx(l2_norm(v)).epsilon(1e-3));
  }

  TEST_CASE("unfold after reconstruct converges like eps") {
    MacroGrid g(40.0, 8192);
    CellGrid cell(64);
    auto V = TwoScaleField::from_function(
        g, cell, [](double x, double y) { return std::exp(-x * x / 50.0) * (1.0 + std::sin(kTwoPi * y)); });
    const double e1 = l2_diff(unfold(reconstruct(V, 1.0), 1.0, cell), V);
    const double e2 = l2_diff(unfold(reconstruct(V, 0.5), 0.5, cell), V);
    CHECK(e2 / e1 > 0.35);
    CHECK(e2 / e1 < 0.65);
  }

  TEST_CASE("error series") {
    MacroGrid g(30.0, 600);
    CellGrid cell(8);
    auto U = Field1D::from_function(g, [](double x) { return std::exp(-x * x / 9.0); });
    auto V = TwoScaleField::from_function(g, cell, [](double x, double y) { return 0.1 * std::exp(-x * x) * std::sin(kTwoPi * y); });
    std::vector<TwoScaleState> ts{{0.0, U, V}, {1.0, U, V}};
    std::vector<EpsState> same{{0.0, 2.0, U, reconstruct(V, 2.0)}, {1.0, 2.0, U, reconstruct(V, 2.0)}};
    auto s = error_series(same, ts, 2.0);
    CHECK(s.size() == 2);
    CHECK(s.max_combined() == 0.0);
    CHECK(s.grad_err.back() == 0.0);

    auto shifted = same;
    shifted[1].u = roll(U, 1);
    auto e = error_series(shifted, ts, 2.0);
    CHECK(e.u_err_l2[1] == doctest::Approx(l2_norm(roll(U, 1) - U)).epsilon(1e-14));
    CHECK(e.u_err_linf[1] == doctest::Approx(linf_norm(roll(U, 1) - U)).epsilon(1e-14));
    CHECK(e.grad_err[1] == doctest::Approx(l2_norm(spectral_derivative(roll(U, 1) - U))).epsilon(1e-12));

    std::vector<EpsState> other_grid{{0.0, 2.0, Field1D(MacroGrid(30.0, 300)), Field1D(MacroGrid(30.0, 300))}};
    std::vector<TwoScaleState> one{ts[0]};
    CHECK_THROWS_AS(error_series(other_grid, one, 2.0), GridMismatch);
    CHECK_THROWS_AS(error_series(same, one, 2.0), GridMismatch);
  }

  TEST_CASE("rate fit") {
    auto a = fit_rate({2.0, 16.0, 4.0, 8.0}, {1.4, 11.2, 2.8, 5.6});
    CHECK(a.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.epsilons.front() == 16.0);
    CHECK(a.monotone);
    auto b = fit_rate({1.0, 0.5, 0.25}, {1.0, 0.25, 0.0625});
    CHECK(b.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(fit_rate({1.0, 0.5}, {1.0, 0.5}), DegenerateFit);
    CHECK_THROWS_AS(fit_rate({1.0, 0.5, 0.25}, {1.0, 2.0, 0.5}), DegenerateFit);
    CHECK_THROWS_AS(fit_rate({1.0, 0.5, 0.25}, {1.0, 0.0, 0.5}), DegenerateFit);
    auto c = fit_rate({1.0, 0.5, 0.25}, {1.0, 1.2, 0.5});
    CHECK(!c.monotone);
  }

  TEST_CASE("dual norm lemma") {
    MacroGrid g(60.0, 16384);
    CellGrid cell(64);
    auto flat = TwoScaleField::from_function(g, cell, [](double x, double) { return std::exp(-x * x / 100.0); });
    for (const auto& r : check_dual_norm_lemma(flat, {1.0, 0.5})) CHECK(r.ratio < 1e-15);

    auto gfun = TwoScaleField::from_function(
        g, cell, [](double x, double y) { return std::exp(-x * x / 100.0) * std::sin(kTwoPi * y); });
    auto r = check_dual_norm_lemma(gfun, {1.0, 0.5, 0.25});
    for (const auto& x : r) CHECK(x.ratio <= 1.05);
    CHECK(r[1].dual_norm / r[0].dual_norm > 0.4);
    CHECK(r[1].dual_norm / r[0].dual_norm < 0.6);
    CHECK(r[2].dual_norm / r[1].dual_norm > 0.4);
    CHECK(r[2].dual_norm / r[1].dual_norm < 0.6);
  }

  TEST_CASE("growth bound constants") {
    auto b = growth_bound(preset_coefficients("ex1-two-sines"), 0.7);
    CHECK(b.C == 1.0);
    // sup |sqrt2 (sin t + sin 2t)| at cos t = (sqrt33 - 1) / 8
    const double ct = (std::sqrt(33.0) - 1.0) / 8.0, st = std::sqrt(1.0 - ct * ct);
    CHECK(b.kappa == doctest::Approx(std::sqrt(2.0) * (st + 2.0 * st * ct)).epsilon(2e-3));
    auto b2 = growth_bound(preset_coefficients("ex2-step"), 1.3);
    CHECK(b2.C == 1.3);
    CHECK(b2.kappa == doctest::Approx(1.0));
    CHECK(b2.at(2.0) == doctest::Approx(1.3 * std::exp(2.0)));
    // 2 c3 = 2 ((1 - a)/2)^2 dominates small coefficients
    auto c = preset_coefficients("ex3-contspec");
    c.alpha = CellFunction::constant(0.1);
    CHECK(growth_bound(c, 0.0).kappa == doctest::Approx(0.36125));
  }
}
