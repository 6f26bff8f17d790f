#include "tsfhn/microcell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tsfhn/errors.hpp"
#include "tsfhn/format.hpp"
#include "tsfhn/spectral.hpp"

namespace tsfhn {
namespace {

using std::numbers::pi;

struct BasisFn {
  std::vector<double> values;  // unit norm under cell_inner
  int n;
  bool is_sin;
  std::string label;
};

// 1, sqrt2 cos(2 pi n y), sqrt2 sin(2 pi n y) for n below the cell Nyquist index.
std::vector<BasisFn> trig_basis(const CellGrid& cell) {
  std::vector<BasisFn> out;
  const std::size_t ny = cell.size();
  out.push_back({std::vector<double>(ny, 1.0), 0, false, "const"});
  for (std::size_t n = 1; 2 * n < ny; ++n) {
    BasisFn c{std::vector<double>(ny), static_cast<int>(n), false, "cos" + std::to_string(n)};
    BasisFn s{std::vector<double>(ny), static_cast<int>(n), true, "sin" + std::to_string(n)};
    for (std::size_t k = 0; k < ny; ++k) {
      const double arg = 2.0 * pi * static_cast<double>(n) * cell.y(k);
      c.values[k] = std::sqrt(2.0) * std::cos(arg);
      s.values[k] = std::sqrt(2.0) * std::sin(arg);
    }
    out.push_back(std::move(c));
    out.push_back(std::move(s));
  }
  return out;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

}  // namespace

CubicNonlinearity::CubicNonlinearity(double a, double scale) : a_(a), scale_(scale) {
  if (!(a > 0.0 && a < 1.0)) throw ValidationError("a", "threshold must lie in (0, 1)");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("scale", "must be positive and finite");
}

CubicNonlinearity::Growth CubicNonlinearity::growth() const noexcept {
  // u <= 0: all three factors give f >= 0. u >= 0: f/u = (1-u)(u-a) peaks at u = (1+a)/2.
  const double h = 0.5 * (1.0 - a_);
  return {0.0, 0.0, scale_ * h * h, 0.0};
}

std::string CubicNonlinearity::describe() const {
  std::string body = "u(1-u)(u-" + fmt_short(a_) + ")";
  return scale_ == 1.0 ? body : fmt_short(scale_) + "*" + body;
}

void CoefficientSet::validate() const {
  if (d.is_constant()) {
    if (d.constant_value() < 0.0) throw ValidationError("d", "must be >= 0");
  } else {
    if (d.kind() == CellFunction::Kind::Steps)
      throw ValidationError("d", "non-constant d must be C1; step functions are not allowed");
    const auto s = d.sample(CellGrid(1024));
    if (*std::min_element(s.begin(), s.end()) <= 0.0)
      throw ValidationError("d", "non-constant d must be bounded below by a positive constant");
  }
}

SampledCoefficients sample_coefficients(const CoefficientSet& coeffs, const CellGrid& cell) {
  return {coeffs.alpha.sample(cell), coeffs.beta.sample(cell), coeffs.b.sample(cell), coeffs.d.sample(cell)};
}

std::vector<double> apply_L(const CoefficientSet& coeffs, std::span<const double> phi) {
  const CellGrid cell(phi.size());
  const auto b = coeffs.b.sample(cell);
  std::vector<double> out(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) out[k] = b[k] * phi[k];
  if (coeffs.d.is_zero()) return out;
  if (coeffs.d.is_constant()) {
    const double d = coeffs.d.constant_value();
    const auto lap = periodic_derivative(phi, 1.0, 2);
    for (std::size_t k = 0; k < phi.size(); ++k) out[k] -= d * lap[k];
    return out;
  }
  const auto d = coeffs.d.sample(cell);
  auto flux = periodic_derivative(phi, 1.0, 1);
  for (std::size_t k = 0; k < flux.size(); ++k) flux[k] *= d[k];
  const auto div = periodic_derivative(flux, 1.0, 1);
  for (std::size_t k = 0; k < phi.size(); ++k) out[k] -= div[k];
  return out;
}

EigenDecomposition decompose(const CoefficientSet& coeffs, const CellGrid& cell, std::size_t truncation,
                             double mode_tol) {
  if (!coeffs.b.is_constant())
    throw UnsupportedOperator("decompose: b is not constant; L has no computable point spectrum here");
  if (!coeffs.d.is_constant()) throw UnsupportedOperator("decompose: non-constant d is not supported");
  const double b = coeffs.b.constant_value();
  const double d = coeffs.d.constant_value();
  if (!(b > 0.0)) throw UnsupportedOperator("decompose: spectrum must be positive (b > 0)");
  if (d < 0.0) throw UnsupportedOperator("decompose: d must be >= 0");

  EigenDecomposition out;
  out.cell = cell;
  const auto alpha = coeffs.alpha.sample(cell);
  const double alpha_norm = cell_norm(alpha);

  if (d > 0.0) {
    out.family = EigenDecomposition::Family::ConstantDiffusion;
    struct Candidate {
      BasisFn fn;
      double lambda;
    };
    std::vector<Candidate> rest;
    for (auto& fn : trig_basis(cell)) {
      const double kk = 2.0 * pi * fn.n;
      const double lambda = b + d * kk * kk;
      const double c = cell_inner(alpha, fn.values);
      if (alpha_norm > 0.0 && c * c > mode_tol * alpha_norm * alpha_norm) {
        CellMode m;
        m.shape = fn.values;
        for (double& v : m.shape) v *= c;
        m.lambda = lambda;
        m.norm = std::abs(c);
        m.label = fn.label;
        out.modes.push_back(std::move(m));
      } else {
        rest.push_back({std::move(fn), lambda});
      }
    }
    std::stable_sort(rest.begin(), rest.end(),
                     [](const Candidate& x, const Candidate& y) { return x.lambda < y.lambda; });
    out.gap.sigma_plus = rest.empty() ? std::numeric_limits<double>::infinity() : rest.front().lambda;
    for (std::size_t i = 0; i < rest.size() && i < truncation; ++i)
      out.guided_modes.push_back({rest[i].fn.values, rest[i].lambda, 1.0, rest[i].fn.label});
  } else {
    out.family = EigenDecomposition::Family::ZeroDiffusion;
    // L = b Id: alpha itself is the guiding eigenfunction; the complement is
    // spanned by beta's orthogonal part followed by trig functions.
    if (alpha_norm > 0.0) out.modes.push_back({alpha, b, alpha_norm, "alpha"});
    std::vector<std::vector<double>> basis;
    if (alpha_norm > 0.0) {
      basis.push_back(alpha);
      for (double& v : basis.back()) v /= alpha_norm;
    }
    std::vector<std::vector<double>> candidates;
    candidates.push_back(coeffs.beta.sample(cell));
    for (auto& fn : trig_basis(cell)) candidates.push_back(std::move(fn.values));
    std::size_t next_trig = 0;
    for (auto& cand : candidates) {
      if (out.guided_modes.size() >= truncation) break;
      const double before = cell_norm(cand);
      if (before == 0.0) continue;
      // Two Gram-Schmidt sweeps keep orthogonality at rounding level.
      for (int sweep = 0; sweep < 2; ++sweep)
        for (const auto& e : basis) axpy(-cell_inner(cand, e), e, cand);
      const double after = cell_norm(cand);
      if (after <= 1e-8 * before) continue;
      for (double& v : cand) v /= after;
      basis.push_back(cand);
      const bool is_beta = (&cand == &candidates.front());
      out.guided_modes.push_back({cand, b, 1.0, is_beta ? "beta_perp" : "trig" + std::to_string(next_trig++)});
    }
    out.gap.sigma_plus = b;
  }

  std::vector<double> rem = alpha;
  for (const auto& m : out.modes) axpy(-1.0, m.shape, rem);
  out.alpha_residual = alpha_norm > 0.0 ? cell_norm(rem) / alpha_norm : 0.0;
  return out;
}

void GuidingParams::validate() const {
  if (alpha.size() != m || beta.size() != m || lambda.size() != m)
    throw ValidationError("guiding", "parameter lists must have length m");
  if (!lambda_explicit.empty() && lambda_explicit.size() != m)
    throw ValidationError("lambda_explicit", "must be empty or have length m");
  for (std::size_t i = 0; i < lambda_explicit.size(); ++i)
    if (!(lambda_explicit[i] >= 0.0 && lambda_explicit[i] <= lambda[i]))
      throw ValidationError("lambda_explicit", "must lie in [0, lambda_i]");
  for (double l : lambda)
    if (!(l > 0.0)) throw ValidationError("lambda", "guiding eigenvalues must be positive");
  for (double a : alpha)
    if (!std::isfinite(a)) throw ValidationError("alpha", "must be finite");
  for (double b : beta)
    if (!std::isfinite(b)) throw ValidationError("beta", "must be finite");
}

GuidingParams guiding_params(const EigenDecomposition& decomp, const CoefficientSet& coeffs) {
  GuidingParams p;
  p.m = decomp.modes.size();
  const auto beta = coeffs.beta.sample(decomp.cell);
  std::vector<double> rest = beta;
  for (const auto& mode : decomp.modes) {
    const double ai = cell_norm(mode.shape);
    const double bi = cell_inner(beta, mode.shape) / ai;
    p.alpha.push_back(ai);
    p.beta.push_back(bi);
    p.lambda.push_back(mode.lambda);
    p.lambda_explicit.push_back(coeffs.b.constant_value());
    axpy(-bi / ai, mode.shape, rest);
  }
  p.beta_plus_norm = cell_norm(rest);
  for (const auto& g : decomp.guided_modes) axpy(-cell_inner(rest, g.shape), g.shape, rest);
  p.beta_residual_norm = cell_norm(rest);
  return p;
}

Projection project(const EigenDecomposition& decomp, std::span<const double> phi) {
  if (phi.size() != decomp.cell.size()) throw GridMismatch("project: phi length != n_y");
  Projection p;
  std::vector<double> rest(phi.begin(), phi.end());
  for (const auto& mode : decomp.modes) {
    const double c = cell_inner(phi, mode.shape) / mode.norm;
    p.guiding.push_back(c);
    axpy(-c / mode.norm, mode.shape, rest);
  }
  for (const auto& g : decomp.guided_modes) {
    const double c = cell_inner(phi, g.shape);
    p.guided.push_back(c);
    axpy(-c, g.shape, rest);
  }
  p.residual = cell_norm(rest);
  return p;
}

std::vector<double> reconstruct(const EigenDecomposition& decomp, const Projection& p) {
  if (p.guiding.size() != decomp.modes.size() || p.guided.size() != decomp.guided_modes.size())
    throw InvalidArgument("reconstruct: coefficient counts do not match the decomposition");
  std::vector<double> out(decomp.cell.size(), 0.0);
  for (std::size_t i = 0; i < decomp.modes.size(); ++i)
    axpy(p.guiding[i] / decomp.modes[i].norm, decomp.modes[i].shape, out);
  for (std::size_t k = 0; k < decomp.guided_modes.size(); ++k)
    axpy(p.guided[k], decomp.guided_modes[k].shape, out);
  return out;
}

}  // namespace tsfhn
