#include "tsfhn/twoscale_pulse.hpp"

#include <algorithm>
#include <cmath>

#include "tsfhn/errors.hpp"
#include "tsfhn/spectral.hpp"

namespace tsfhn {
namespace {

// Weights of int_0^h exp(-mu (h - s)) u(z_j + s) ds for linear u, as
// w0 * u_j + w1 * u_{j+1}, with r = mu h.
std::pair<double, double> filter_weights(double r, double h) {
  if (r < 1e-2) {
    const double w0 = 0.5 - r / 3.0 + r * r / 8.0 - r * r * r / 30.0 + r * r * r * r / 144.0;
    const double w1 = 0.5 - r / 6.0 + r * r / 24.0 - r * r * r / 120.0 + r * r * r * r / 720.0;
    return {h * w0, h * w1};
  }
  const double q = std::exp(-r);
  const double w1 = (r + std::expm1(-r)) / (r * r);
  const double w0 = (1.0 - q) / (r * r) - q / r;
  return {h * w0, h * w1};
}

}  // namespace

Field1D convolve_mode(const Field1D& u, double beta, double lambda, double c) {
  if (std::abs(c) < 1e-6) throw SpeedZero("convolve_mode: |c| < 1e-6; use stationary_mode");
  if (c < 0.0) throw InvalidArgument("convolve_mode: c must be positive");
  if (!(lambda > 0.0)) throw InvalidArgument("convolve_mode: lambda must be positive");
  const std::size_t n = u.size();
  const double h = u.grid().dx();
  const double r = lambda * h / c;
  const double q = std::exp(-r);
  const auto [w0, w1] = filter_weights(r, h);
  const double s = beta / c;

  Field1D v(u.grid());
  if (beta == 0.0) return v;
  // One sweep from zero gives the response W at index 0 after a full turn;
  // the periodic state satisfies v0 = q^n v0 + W.
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc = q * acc + s * (w0 * u[j] + w1 * u[(j + 1) % n]);
  double cur = acc / (-std::expm1(-r * static_cast<double>(n)));
  v[0] = cur;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    cur = q * cur + s * (w0 * u[j] + w1 * u[j + 1]);
    v[j + 1] = cur;
  }
  return v;
}

Field1D stationary_mode(const Field1D& u, double beta, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("stationary_mode: lambda must be positive");
  Field1D v = u;
  v *= beta / lambda;
  return v;
}

TwoScalePulse assemble(const GuidingPulse& pulse, const EigenDecomposition& decomp,
                       std::span<const double> beta_on_cell) {
  if (beta_on_cell.size() != decomp.cell.size()) throw GridMismatch("assemble: beta length != n_y");
  if (pulse.v.size() != decomp.modes.size())
    throw InvalidArgument("assemble: pulse has a different number of guiding components");
  for (const auto& m : decomp.modes)
    if (!(m.lambda > 0.0)) throw InvalidArgument("assemble: spectrum must be positive");
  for (const auto& m : decomp.guided_modes)
    if (!(m.lambda > 0.0)) throw InvalidArgument("assemble: spectrum must be positive");

  const MacroGrid& grid = pulse.u.grid();
  const CellGrid& cell = decomp.cell;
  TwoScalePulse out{pulse.c, pulse.u, TwoScaleField(grid, cell), pulse.v, {}, {}, std::nullopt, {}};

  for (const auto& g : decomp.guided_modes) {
    const double bk = cell_inner(beta_on_cell, g.shape);
    out.guided_beta.push_back(bk);
    if (std::abs(bk) < kGuidedBetaFloor) {
      out.guided.emplace_back(grid);
      continue;
    }
    out.guided.push_back(pulse.c == 0.0 ? stationary_mode(pulse.u, bk, g.lambda)
                                        : convolve_mode(pulse.u, bk, g.lambda, pulse.c));
  }

  const std::size_t ny = cell.size();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    auto row = out.v.row(j);
    for (std::size_t i = 0; i < decomp.modes.size(); ++i) {
      const double a = pulse.v[i][j] / decomp.modes[i].norm;
      for (std::size_t k = 0; k < ny; ++k) row[k] += a * decomp.modes[i].shape[k];
    }
    for (std::size_t g = 0; g < decomp.guided_modes.size(); ++g) {
      const double a = out.guided[g][j];
      if (a == 0.0) continue;
      for (std::size_t k = 0; k < ny; ++k) row[k] += a * decomp.guided_modes[g].shape[k];
    }
  }

  for (const auto& f : out.guiding) out.component_norms.push_back(linf_norm(f));
  for (const auto& f : out.guided) out.component_norms.push_back(linf_norm(f));

  const Field1D norm = out.v.cell_l2_norm();
  const double peak = linf_norm(norm);
  if (peak > 0.0) {
    auto t = fit_two_sided(norm.values(), grid.size() / 2, grid.dx(), 1e-6 * peak, 1e-3 * peak);
    out.gamma = t.rate();
  }
  return out;
}

DecayReport decay_report(const TwoScalePulse& pulse, std::size_t min_samples) {
  const MacroGrid& grid = pulse.u.grid();
  const std::size_t mid = grid.size() / 2;
  auto fit = [&](const Field1D& f, const char* what) {
    const double peak = linf_norm(f);
    auto t = fit_two_sided(f.values(), mid, grid.dx(), 1e-6 * peak, 1e-3 * peak, min_samples);
    if (!t.rate()) throw TailTooShort(std::string("decay_report: too few tail samples for ") + what);
    return t;
  };
  // ||v_z(z,.)|| from the spectral z-derivative of every y column.
  const std::size_t ny = pulse.v.cell().size();
  TwoScaleField vz(grid, pulse.v.cell());
  std::vector<double> col(grid.size());
  for (std::size_t k = 0; k < ny; ++k) {
    for (std::size_t j = 0; j < grid.size(); ++j) col[j] = pulse.v(j, k);
    const auto d = periodic_derivative(col, grid.length(), 1);
    for (std::size_t j = 0; j < grid.size(); ++j) vz(j, k) = d[j];
  }
  DecayReport r;
  r.v_norm = fit(pulse.v.cell_l2_norm(), "||v||");
  r.vz_norm = fit(vz.cell_l2_norm(), "||v_z||");
  r.u = fit(pulse.u, "u");
  r.gamma = *r.v_norm.rate();
  r.gamma_z = *r.vz_norm.rate();
  r.sigma_u = *r.u.rate();
  return r;
}

ComovingResidual comoving_residual(const TwoScalePulse& pulse, const CoefficientSet& coeffs) {
  const MacroGrid& grid = pulse.u.grid();
  const CellGrid& cell = pulse.v.cell();
  const std::size_t n = grid.size(), ny = cell.size();
  const auto alpha = coeffs.alpha.sample(cell);
  const auto beta = coeffs.beta.sample(cell);

  ComovingResidual r{Field1D(grid), TwoScaleField(grid, cell), 0.0, 0.0};
  const auto du = spectral_derivative(pulse.u);
  const auto d2u = spectral_second_derivative(pulse.u);
  const auto inhib = pulse.v.cell_average(alpha);
  for (std::size_t j = 0; j < n; ++j)
    r.u_residual[j] = pulse.c * du[j] - d2u[j] - coeffs.f(pulse.u[j]) + inhib[j];

  std::vector<double> col(n);
  for (std::size_t k = 0; k < ny; ++k) {
    for (std::size_t j = 0; j < n; ++j) col[j] = pulse.v(j, k);
    const auto d = periodic_derivative(col, grid.length(), 1);
    for (std::size_t j = 0; j < n; ++j) r.v_residual(j, k) = pulse.c * d[j] - beta[k] * pulse.u[j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto Lv = apply_L(coeffs, pulse.v.row(j));
    auto row = r.v_residual.row(j);
    for (std::size_t k = 0; k < ny; ++k) row[k] += Lv[k];
  }
  r.u_l2 = l2_norm(r.u_residual);
  r.v_l2 = l2_norm(r.v_residual);
  return r;
}

}  // namespace tsfhn
