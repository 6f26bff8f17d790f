#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "tsfhn/errors.hpp"
#include "tsfhn/microcell.hpp"
#include "tsfhn/presets.hpp"

using namespace tsfhn;
using std::numbers::pi;

namespace {

std::vector<double> sampled(const CellGrid& c, double (*fn)(double)) {
  std::vector<double> v(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) v[k] = fn(c.y(k));
  return v;
}

double rel_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0, den = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_SUITE("microcell") {
  TEST_CASE("cell function shapes and parsing") {
    auto step = CellFunction::parse("steps 0 1 0.7 -1");
    CHECK(step(0.5) == 1.0);
    CHECK(step(0.8) == -1.0);
    CHECK(step(0.7) == -1.0);
    CHECK(step(1.5) == 1.0);
    CHECK(step(-0.2) == -1.0);
    auto tr = CellFunction::parse("trig 0.5 sin 1 2 cos 3 -1");
    CHECK(tr(0.25) == doctest::Approx(0.5 + 2 - std::cos(1.5 * pi)));
    CHECK(CellFunction::parse("const 3").is_constant());
    CHECK(CellFunction::parse("const 0").is_zero());
    CHECK(!tr.is_constant());
    CHECK(tr.sup_abs() <= 3.5);
    CHECK(CellFunction::parse(tr.describe()).describe() == tr.describe());
    CHECK_THROWS_AS(CellFunction::parse("steps 0.1 1"), InvalidArgument);
    CHECK_THROWS_AS(CellFunction::parse("steps 0 1 0.5"), InvalidArgument);
    CHECK_THROWS_AS(CellFunction::parse("trig 0 tan 1 1"), InvalidArgument);
    CHECK_THROWS_AS(CellFunction::parse("trig 0 sin 1.5 1"), InvalidArgument);
    CHECK_THROWS_AS(CellFunction::parse("wave 1"), InvalidArgument);
    CHECK_THROWS_AS(CellFunction::parse("const x"), InvalidArgument);
  }

  TEST_CASE("nonlinearity") {
    CubicNonlinearity f(0.15);
    CHECK(f(0.0) == 0.0);
    CHECK(f(0.15) == 0.0);
    CHECK(f(1.0) == 0.0);
    CHECK(f.describe() == "u(1-u)(u-0.15)");
    CHECK_THROWS_AS(CubicNonlinearity(1.2), ValidationError);
    // Growth constants bound f on a dense sweep.
    auto g = f.growth();
    for (double u = -5; u <= 5; u += 1e-3) {
      if (u <= 0) CHECK(f(u) >= g.c1 * u - g.c2 - 1e-15);
      if (u >= 0) CHECK(f(u) <= g.c3 * u + g.c4 + 1e-15);
    }
    CHECK(g.c3 == doctest::Approx(0.180625));
  }

  TEST_CASE("sampling presets") {
    CellGrid cell(160);
    auto ex2 = preset_coefficients("ex2-step");
    CHECK(ex2.alpha(0.5) == 1.0);
    CHECK(ex2.alpha(0.8) == -1.0);
    auto s = sample_coefficients(ex2, cell);
    double mean = 0;
    for (double v : s.alpha) mean += v;
    CHECK(mean / 160.0 == doctest::Approx(0.4).epsilon(1e-14));
    auto ex1 = preset_coefficients("ex1-two-sines");
    const double a1 = std::sqrt(2.0) * std::sin(2 * pi * 0.25);
    CHECK(a1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    auto one = CoefficientSet{};
    one.alpha = CellFunction::constant(1.0);
    for (double v : sample_coefficients(one, cell).alpha) CHECK(v == 1.0);
    CHECK(ex1.beta(0.1) == doctest::Approx(0.001 * (ex1.alpha(0.1) + std::sqrt(2.0) * std::sin(8 * pi * 0.1))));
    CHECK_THROWS_AS(preset_coefficients("ex9"), ValidationError);
  }

  TEST_CASE("apply_L on trig eigenfunctions") {
    const double delta = 1e-4;
    CoefficientSet c;
    c.b = CellFunction::constant(delta);
    c.d = CellFunction::constant(delta);
    CellGrid cell(128);
    auto phi = sampled(cell, [](double y) { return std::sin(2 * pi * y); });
    auto Lphi = apply_L(c, phi);
    for (std::size_t k = 0; k < phi.size(); ++k) CHECK(std::abs(Lphi[k] - delta * (1 + 4 * pi * pi) * phi[k]) < 1e-10);
    auto psi = sampled(cell, [](double y) { return std::cos(4 * pi * y); });
    auto Lpsi = apply_L(c, psi);
    for (std::size_t k = 0; k < psi.size(); ++k)
      CHECK(std::abs(Lpsi[k] - delta * (1 + 16 * pi * pi) * psi[k]) < 1e-10);

    CoefficientSet m;
    m.b = CellFunction::constant(0.3);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ud(-1, 1);
    std::vector<double> r(64);
    for (auto& v : r) v = ud(rng);
    auto Lr = apply_L(m, r);
    for (std::size_t k = 0; k < r.size(); ++k) CHECK(Lr[k] == 0.3 * r[k]);
  }

  TEST_CASE("apply_L with variable d matches the analytic flux form") {
    CoefficientSet c;
    c.b = CellFunction::constant(0.0);
    c.d = CellFunction::parse("trig 2 cos 1 1");
    CellGrid cell(64);
    auto phi = sampled(cell, [](double y) { return std::sin(2 * pi * y); });
    auto Lphi = apply_L(c, phi);
    for (std::size_t k = 0; k < phi.size(); ++k) {
      const double y = cell.y(k);
      // -(d phi')' with d = 2 + cos(2 pi y), phi = sin(2 pi y)
      const double w = 2 * pi;
      const double expect = -(-w * std::sin(w * y) * w * std::cos(w * y) - (2 + std::cos(w * y)) * w * w * std::sin(w * y));
      CHECK(std::abs(Lphi[k] - expect) < 1e-9);
    }
  }

  TEST_CASE("ex1 decomposition has closed-form eigenvalues") {
    auto c = preset_coefficients("ex1-two-sines");
    CellGrid cell(128);
    auto dec = decompose(c, cell);
    REQUIRE(dec.modes.size() == 2);
    const double l1 = 0.0001 * (1 + 4 * pi * pi);
    const double l2 = 0.0001 * (1 + 16 * pi * pi);
    CHECK(std::abs(dec.modes[0].lambda - l1) <= 1e-14 * l1);
    CHECK(std::abs(dec.modes[1].lambda - l2) <= 1e-14 * l2);
    CHECK(dec.modes[0].shape[32] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(dec.guided_modes.size() == kDefaultGuidedModes);
    CHECK(dec.gap.sigma_plus == doctest::Approx(0.0001));
    CHECK(dec.alpha_residual < 1e-14);
    for (const auto& m : dec.modes) {
      auto Lm = apply_L(c, m.shape);
      std::vector<double> diff(Lm.size());
      for (std::size_t k = 0; k < Lm.size(); ++k) diff[k] = Lm[k] - m.lambda * m.shape[k];
      CHECK(cell_norm(diff) <= 1e-10 * cell_norm(m.shape));
      CHECK(m.lambda > 0);
    }
    for (const auto& g : dec.guided_modes) {
      auto Lg = apply_L(c, g.shape);
      CHECK(rel_diff(Lg, std::vector<double>(g.shape.size(), 0.0)) > 0);
      std::vector<double> lam(g.shape);
      for (double& v : lam) v *= g.lambda;
      CHECK(rel_diff(Lg, lam) <= 1e-10);
    }
    // Pairwise orthogonality over all stored modes.
    std::vector<std::vector<double>> all;
    for (const auto& m : dec.modes) all.push_back(m.shape);
    for (const auto& g : dec.guided_modes) all.push_back(g.shape);
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = i + 1; j < all.size(); ++j) CHECK(std::abs(cell_inner(all[i], all[j])) < 1e-10);
  }

  TEST_CASE("ex1 guiding params") {
    auto c = preset_coefficients("ex1-two-sines");
    auto dec = decompose(c, CellGrid(128));
    auto p = guiding_params(dec, c);
    REQUIRE(p.m == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::abs(p.alpha[i] - 1.0) <= 1e-10);
      CHECK(std::abs(p.beta[i] - 0.001) <= 1e-10);
    }
    CHECK(std::abs(p.beta_plus_norm - 0.001) <= 1e-12);
    CHECK(p.beta_residual_norm < 1e-14);
    p.validate();
  }

  TEST_CASE("ex2 decomposition has alpha as its single mode") {
    auto c = preset_coefficients("ex2-step");
    CellGrid cell(160);
    auto dec = decompose(c, cell);
    REQUIRE(dec.modes.size() == 1);
    CHECK(dec.modes[0].lambda == 0.00001);
    CHECK(dec.family == EigenDecomposition::Family::ZeroDiffusion);
    auto p = guiding_params(dec, c);
    CHECK(p.alpha[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.beta[0] == doctest::Approx(0.003).epsilon(1e-13));
    CHECK(p.beta_plus_norm < 1e-15);
    for (const auto& g : dec.guided_modes) {
      CHECK(g.lambda == 0.00001);
      CHECK(std::abs(cell_inner(g.shape, dec.modes[0].shape)) < 1e-12);
    }
  }

  TEST_CASE("ex3 is refused") {
    auto c = preset_coefficients("ex3-contspec");
    CHECK_THROWS_AS(decompose(c, CellGrid(64)), UnsupportedOperator);
    CoefficientSet neg;
    neg.alpha = CellFunction::constant(1.0);
    neg.b = CellFunction::constant(-1.0);
    neg.d = CellFunction::constant(0.0);
    CHECK_THROWS_AS(decompose(neg, CellGrid(64)), UnsupportedOperator);
  }

  TEST_CASE("decoupling when beta is orthogonal to the guiding modes") {
    auto c = preset_coefficients("ex1-two-sines");
    c.beta = CellFunction::trig(0.0, {{false, 3, 0.01}});
    auto p = guiding_params(decompose(c, CellGrid(64)), c);
    for (double b : p.beta) CHECK(std::abs(b) < 1e-16);
  }

  TEST_CASE("projection algebra") {
    auto c = preset_coefficients("ex1-two-sines");
    CellGrid cell(128);
    auto dec = decompose(c, cell);
    auto p1 = project(dec, dec.modes[0].shape);
    CHECK(p1.guiding[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(p1.guiding[1]) < 1e-13);
    for (double g : p1.guided) CHECK(std::abs(g) < 1e-13);

    auto phi = sampled(cell, [](double y) { return std::sqrt(2.0) * std::sin(8 * pi * y); });
    auto pp = project(dec, phi);
    for (double g : pp.guiding) CHECK(std::abs(g) < 1e-13);
    double mass = 0;
    for (double g : pp.guided) mass += g * g;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> r(cell.size());
      for (auto& v : r) v = nd(rng);
      auto pr = project(dec, r);
      auto back = reconstruct(dec, pr);
      std::vector<double> err(r.size());
      for (std::size_t k = 0; k < r.size(); ++k) err[k] = r[k] - back[k];
      CHECK(std::abs(cell_norm(err) - pr.residual) <= 1e-12 * cell_norm(r));
      double pyth = pr.residual * pr.residual;
      for (double v : pr.guiding) pyth += v * v;
      for (double v : pr.guided) pyth += v * v;
      const double n2 = cell_inner(r, r);
      CHECK(std::abs(pyth - n2) <= 1e-10 * n2);
      auto again = project(dec, back);
      for (std::size_t i = 0; i < again.guiding.size(); ++i) CHECK(std::abs(again.guiding[i] - pr.guiding[i]) < 1e-12);
      for (std::size_t i = 0; i < again.guided.size(); ++i) CHECK(std::abs(again.guided[i] - pr.guided[i]) < 1e-12);
    }
  }
}
