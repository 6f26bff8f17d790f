#include "tsfhn/simulators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsfhn {

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt", "must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end", "must be >= 0");
  if (observe_every == 0) throw ValidationError("observe_every", "must be >= 1");
  if (!(blowup_ceiling > 0.0)) throw ValidationError("blowup_ceiling", "must be positive");
  const double n = t_end / dt;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    throw ValidationError("t_end", "must be an integer multiple of dt");
  if (steps() % observe_every != 0)
    throw ValidationError("observe_every", "observe_every * dt must divide t_end");
}

std::size_t SolverConfig::steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

double TwoScaleState::sup_norm() const noexcept {
  double m = linf_norm(U);
  for (double v : V.values()) m = std::max(m, std::abs(v));
  return m;
}

namespace {

std::vector<double> diffusion_denominators(const MacroGrid& grid, double dt, double diffusivity) {
  const auto k = wavenumbers(grid);
  std::vector<double> out(k.size());
  for (std::size_t m = 0; m < k.size(); ++m) out[m] = 1.0 / (1.0 + dt * diffusivity * k[m] * k[m]);
  return out;
}

void diffuse(std::vector<double>& rhs, const std::vector<double>& denom, std::vector<Complex>& spec,
             std::span<double> out) {
  auto& fft = detail::cached_fft(rhs.size());
  fft.forward(rhs, spec);
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= denom[m];
  fft.inverse(spec, out);
}

}  // namespace

EpsSolver::EpsSolver(const MacroGrid& grid, const CoefficientSet& coeffs, double epsilon, const SolverConfig& cfg)
    : grid_(grid), coeffs_(coeffs), eps_(epsilon), cfg_(cfg) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon", "must be positive");
  if (!(cfg.dt > 0.0)) throw ValidationError("dt", "must be positive");
  coeffs_.validate();
  const std::size_t n = grid.size();
  alpha_.resize(n);
  beta_.resize(n);
  b_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = grid.x(j) / eps_;
    alpha_[j] = coeffs.alpha(y);
    beta_[j] = coeffs.beta(y);
    b_[j] = coeffs.b(y);
  }
  if (coeffs.d.is_constant()) {
    v_diffusivity_ = eps_ * eps_ * coeffs.d.constant_value();
  } else {
    d_half_.resize(n);
    for (std::size_t j = 0; j < n; ++j) d_half_[j] = eps_ * eps_ * coeffs.d((grid.x(j) + 0.5 * grid.dx()) / eps_);
  }
  u_denom_ = diffusion_denominators(grid, cfg.dt, 1.0);
  v_denom_ = diffusion_denominators(grid, cfg.dt, v_diffusivity_);
  ru_.resize(n);
  rv_.resize(n);
  spec_.resize(n / 2 + 1);
}

void EpsSolver::step(EpsState& s) {
  require_same_grid(grid_, s.u.grid(), "eps step");
  require_same_grid(grid_, s.v.grid(), "eps step");
  const std::size_t n = grid_.size();
  const double dt = cfg_.dt;
  const auto u = s.u.values();
  const auto v = s.v.values();
  for (std::size_t j = 0; j < n; ++j) {
    ru_[j] = u[j] + dt * (coeffs_.f(u[j]) - alpha_[j] * v[j]);
    rv_[j] = v[j] + dt * (-b_[j] * v[j] + beta_[j] * u[j]);
  }
  if (!d_half_.empty()) {
    // Conservative explicit flux for (eps^2 d(x/eps) v_x)_x.
    const double h2 = grid_.dx() * grid_.dx();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t jp = (j + 1) % n, jm = (j + n - 1) % n;
      rv_[j] += dt * (d_half_[j] * (v[jp] - v[j]) - d_half_[jm] * (v[j] - v[jm])) / h2;
    }
  }
  diffuse(ru_, u_denom_, spec_, s.u.values());
  if (v_diffusivity_ > 0.0) {
    diffuse(rv_, v_denom_, spec_, s.v.values());
  } else {
    std::copy(rv_.begin(), rv_.end(), s.v.values().begin());
  }
  s.t += dt;
  if (!(s.sup_norm() <= cfg_.blowup_ceiling)) throw BlowUp("eps-system exceeded the blow-up ceiling", s.t);
}

TwoScaleSolver::TwoScaleSolver(const MacroGrid& grid, const CellGrid& cell, const CoefficientSet& coeffs,
                               const SolverConfig& cfg)
    : grid_(grid), cell_(cell), coeffs_(coeffs), cfg_(cfg) {
  if (!(cfg.dt > 0.0)) throw ValidationError("dt", "must be positive");
  coeffs_.validate();
  alpha_ = coeffs.alpha.sample(cell);
  beta_ = coeffs.beta.sample(cell);
  b_ = coeffs.b.sample(cell);
  d_ = coeffs.d.sample(cell);
  if (coeffs.d.is_zero()) {
    ymode_ = YMode::None;
  } else if (coeffs.d.is_constant()) {
    ymode_ = YMode::Implicit;
    d_const_ = coeffs.d.constant_value();
    const auto ky = wavenumbers(cell.size(), 1.0);
    y_denom_.resize(ky.size());
    for (std::size_t m = 0; m < ky.size(); ++m) y_denom_[m] = 1.0 / (1.0 + cfg.dt * d_const_ * ky[m] * ky[m]);
    yfft_ = std::make_unique<BatchedRealFft>(grid.size(), cell.size());
    yspec_.resize(grid.size() * yfft_->spectrum_size());
  } else {
    ymode_ = YMode::Explicit;
  }
  u_denom_ = diffusion_denominators(grid, cfg.dt, 1.0);
  ru_.resize(grid.size());
  spec_.resize(grid.size() / 2 + 1);
}

TwoScaleSolver::~TwoScaleSolver() = default;
TwoScaleSolver::TwoScaleSolver(TwoScaleSolver&&) noexcept = default;

void TwoScaleSolver::step(TwoScaleState& s) {
  require_same_grid(grid_, s.U.grid(), "two-scale step");
  if (!(s.V.cell() == cell_)) throw GridMismatch("two-scale step: cell grid differs");
  const std::size_t n = grid_.size(), ny = cell_.size();
  const double dt = cfg_.dt;
  const double dy = cell_.dy();
  auto U = s.U.values();
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = s.V.row(j);
    double inhib = 0.0;
    for (std::size_t k = 0; k < ny; ++k) inhib += alpha_[k] * row[k];
    ru_[j] = U[j] + dt * (coeffs_.f(U[j]) - inhib * dy);
  }
  for (std::size_t j = 0; j < n; ++j) {
    auto row = s.V.row(j);
    const double u = U[j];
    if (ymode_ == YMode::Explicit) {
      std::vector<double> flux = periodic_derivative(row, 1.0, 1);
      for (std::size_t k = 0; k < ny; ++k) flux[k] *= d_[k];
      const auto div = periodic_derivative(flux, 1.0, 1);
      for (std::size_t k = 0; k < ny; ++k) row[k] += dt * (div[k] - b_[k] * row[k] + beta_[k] * u);
    } else {
      for (std::size_t k = 0; k < ny; ++k) row[k] += dt * (-b_[k] * row[k] + beta_[k] * u);
    }
  }
  if (ymode_ == YMode::Implicit) {
    yfft_->forward(s.V.values(), yspec_);
    const std::size_t ns = yfft_->spectrum_size();
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t m = 0; m < ns; ++m) yspec_[j * ns + m] *= y_denom_[m];
    yfft_->inverse(yspec_, s.V.values());
  }
  diffuse(ru_, u_denom_, spec_, U);
  s.t += dt;
  if (!(s.sup_norm() <= cfg_.blowup_ceiling)) throw BlowUp("two-scale system exceeded the blow-up ceiling", s.t);
}

}  // namespace tsfhn
