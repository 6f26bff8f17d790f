#include "tsfhn/verify.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tsfhn/errors.hpp"
#include "tsfhn/fit.hpp"
#include "tsfhn/spectral.hpp"

namespace tsfhn {

Field1D reconstruct(const TwoScaleField& V, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("reconstruct: epsilon must be positive");
  const MacroGrid& grid = V.macro();
  const std::size_t ny = V.cell().size();
  Field1D out(grid);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double s = grid.x(j) / epsilon;
    const double pos = (s - std::floor(s)) * static_cast<double>(ny);
    std::size_t k = static_cast<std::size_t>(std::floor(pos));
    double frac = pos - static_cast<double>(k);
    if (k >= ny) {
      k = 0;
      frac = 0.0;
    }
    const auto row = V.row(j);
    out[j] = row[k] + frac * (row[(k + 1) % ny] - row[k]);
  }
  return out;
}

TwoScaleField unfold(const Field1D& v, double epsilon, const CellGrid& cell) {
  if (!(epsilon > 0.0)) throw InvalidArgument("unfold: epsilon must be positive");
  const MacroGrid& grid = v.grid();
  const std::size_t n = grid.size();
  const double L = grid.half_length(), dx = grid.dx();
  TwoScaleField out(grid, cell);
  for (std::size_t j = 0; j < n; ++j) {
    const double base = epsilon * std::floor(grid.x(j) / epsilon);
    for (std::size_t k = 0; k < cell.size(); ++k) {
      double p = (base + epsilon * cell.y(k) + L) / dx;
      p -= static_cast<double>(n) * std::floor(p / static_cast<double>(n));
      std::size_t i = static_cast<std::size_t>(std::floor(p));
      double frac = p - static_cast<double>(i);
      if (i >= n) {
        i = 0;
        frac = 0.0;
      }
      out(j, k) = v[i] + frac * (v[(i + 1) % n] - v[i]);
    }
  }
  return out;
}

double ErrorSeries::max_combined() const {
  double m = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) m = std::max(m, u_err_l2[k] + v_err_l2[k]);
  return m;
}

ErrorAccumulator::ErrorAccumulator(double epsilon) { s_.epsilon = epsilon; }

void ErrorAccumulator::add(double t, const Field1D& u_eps, const Field1D& v_eps, const Field1D& U,
                           const Field1D& RV) {
  require_same_grid(u_eps.grid(), U.grid(), "error_series");
  require_same_grid(v_eps.grid(), RV.grid(), "error_series");
  require_same_grid(u_eps.grid(), v_eps.grid(), "error_series");
  const Field1D du = u_eps - U;
  const Field1D dv = v_eps - RV;
  const Field1D dux = spectral_derivative(du);
  if (!s_.times.empty()) grad_sq_ += (t - s_.times.back()) * std::pow(l2_norm(dux), 2);
  s_.times.push_back(t);
  s_.u_err_l2.push_back(l2_norm(du));
  s_.v_err_l2.push_back(l2_norm(dv));
  s_.u_err_linf.push_back(linf_norm(du));
  s_.v_err_linf.push_back(linf_norm(dv));
  s_.grad_err.push_back(std::sqrt(grad_sq_));
}

ErrorSeries error_series(const std::vector<EpsState>& eps_traj, const std::vector<TwoScaleState>& twoscale_traj,
                         double epsilon) {
  if (eps_traj.size() != twoscale_traj.size()) throw GridMismatch("error_series: trajectories differ in length");
  ErrorAccumulator acc(epsilon);
  for (std::size_t k = 0; k < eps_traj.size(); ++k) {
    const auto& e = eps_traj[k];
    const auto& r = twoscale_traj[k];
    if (std::abs(e.t - r.t) > 1e-9 * std::max(1.0, std::abs(r.t)))
      throw GridMismatch("error_series: sample times differ");
    acc.add(r.t, e.u, e.v, r.U, reconstruct(r.V, epsilon));
  }
  return acc.series();
}

RateFit fit_rate(std::vector<double> epsilons, std::vector<double> max_errors) {
  if (epsilons.size() != max_errors.size()) throw InvalidArgument("fit_rate: size mismatch");
  if (epsilons.size() < 3) throw DegenerateFit("fit_rate: need at least 3 values of epsilon");
  std::vector<std::size_t> order(epsilons.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return epsilons[a] > epsilons[b]; });
  RateFit r;
  for (auto i : order) {
    if (!(epsilons[i] > 0.0)) throw DegenerateFit("fit_rate: epsilon must be positive");
    if (!(max_errors[i] > 0.0) || !std::isfinite(max_errors[i])) throw DegenerateFit("fit_rate: errors must be positive");
    if (!r.epsilons.empty() && epsilons[i] == r.epsilons.back()) throw DegenerateFit("fit_rate: repeated epsilon");
    r.epsilons.push_back(epsilons[i]);
    r.max_errors.push_back(max_errors[i]);
  }
  r.monotone = true;
  for (std::size_t k = 1; k < r.max_errors.size(); ++k) {
    if (r.max_errors[k] > 1.5 * r.max_errors[k - 1])
      throw DegenerateFit("fit_rate: error grows by more than 50% as epsilon shrinks");
    if (!(r.max_errors[k] < r.max_errors[k - 1])) r.monotone = false;
  }
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < r.epsilons.size(); ++k) {
    lx.push_back(std::log(r.epsilons[k]));
    ly.push_back(std::log(r.max_errors[k]));
  }
  const auto f = linear_fit(lx, ly);
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.r2 = f.r2;
  return r;
}

RateFit fit_rate(const std::vector<ErrorSeries>& series) {
  std::vector<double> e, m;
  for (const auto& s : series) {
    e.push_back(s.epsilon);
    m.push_back(s.max_combined());
  }
  return fit_rate(std::move(e), std::move(m));
}

double h1_l2_norm(const TwoScaleField& g) {
  const MacroGrid& grid = g.macro();
  const std::size_t n = grid.size(), ny = g.cell().size();
  std::vector<double> col(n);
  double sq = 0.0;
  for (std::size_t k = 0; k < ny; ++k) {
    for (std::size_t j = 0; j < n; ++j) col[j] = g(j, k);
    const auto d = periodic_derivative(col, grid.length(), 1);
    for (std::size_t j = 0; j < n; ++j) sq += col[j] * col[j] + d[j] * d[j];
  }
  return std::sqrt(sq * grid.dx() * g.cell().dy());
}

std::vector<DualNormRatio> check_dual_norm_lemma(const TwoScaleField& g, const std::vector<double>& epsilons) {
  const double gn = h1_l2_norm(g);
  const Field1D gbar = g.cell_average();
  std::vector<DualNormRatio> out;
  for (double eps : epsilons) {
    DualNormRatio r;
    r.epsilon = eps;
    r.dual_norm = h1_dual_norm(reconstruct(g, eps) - gbar);
    r.bound = eps * gn;
    r.ratio = r.bound > 0.0 ? r.dual_norm / r.bound : 0.0;
    out.push_back(r);
  }
  return out;
}

double GrowthBound::at(double t) const { return C * std::exp(kappa * t); }

GrowthBound growth_bound(const CoefficientSet& coeffs, double initial_sup) {
  const auto g = coeffs.f.growth();
  GrowthBound b;
  b.C = std::max(1.0, initial_sup);
  b.kappa = std::max({2.0 * g.c1, 2.0 * g.c2, 2.0 * g.c3, 2.0 * g.c4, coeffs.alpha.sup_abs(), coeffs.beta.sup_abs(),
                      coeffs.b.sup_abs()});
  return b;
}

namespace {

// Orthonormal cell functions phi_i with pulse.v(z, .) = sum_i a_i(z) phi_i.
struct ModeExpansion {
  std::vector<std::vector<double>> phi;
  std::vector<Field1D> coeff;
};

ModeExpansion expand(const TwoScalePulse& pulse, const EigenDecomposition& decomp) {
  ModeExpansion e;
  for (std::size_t i = 0; i < decomp.modes.size(); ++i) {
    std::vector<double> p = decomp.modes[i].shape;
    for (double& x : p) x /= decomp.modes[i].norm;
    e.phi.push_back(std::move(p));
    e.coeff.push_back(pulse.guiding[i]);
  }
  for (std::size_t k = 0; k < decomp.guided_modes.size(); ++k) {
    if (linf_norm(pulse.guided[k]) == 0.0) continue;
    e.phi.push_back(decomp.guided_modes[k].shape);
    e.coeff.push_back(pulse.guided[k]);
  }
  return e;
}

// Per-sample data for the distance to shifted copies of the pulse.
struct Snapshot {
  const Field1D* U;
  std::vector<double> v_sq;               // ||V(x_j, .)||^2
  std::vector<std::vector<double>> proj;  // (V(x_j, .), phi_i)
};

Snapshot snapshot(const TwoScaleState& s, const ModeExpansion& e) {
  const std::size_t n = s.U.size();
  Snapshot out{&s.U, std::vector<double>(n), std::vector<std::vector<double>>(e.phi.size(), std::vector<double>(n))};
  for (std::size_t j = 0; j < n; ++j) {
    const auto row = s.V.row(j);
    out.v_sq[j] = cell_inner(row, row);
    for (std::size_t i = 0; i < e.phi.size(); ++i) out.proj[i][j] = cell_inner(row, e.phi[i]);
  }
  return out;
}

// Distance with the shifted pulse given as node values read at j + offset.
double distance(const Snapshot& s, const Field1D& u, const std::vector<Field1D>& a, std::ptrdiff_t offset) {
  const std::size_t n = u.size();
  const auto idx = [&](std::size_t j) {
    return static_cast<std::size_t>(((static_cast<std::ptrdiff_t>(j) + offset) % static_cast<std::ptrdiff_t>(n) +
                                     static_cast<std::ptrdiff_t>(n)) %
                                    static_cast<std::ptrdiff_t>(n));
  };
  double du = 0.0, dv = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = idx(j);
    du = std::max(du, std::abs((*s.U)[j] - u[i]));
    double sq = s.v_sq[j];
    for (std::size_t m = 0; m < a.size(); ++m) sq += a[m][i] * (a[m][i] - 2.0 * s.proj[m][j]);
    dv = std::max(dv, sq);
  }
  return du + std::sqrt(std::max(dv, 0.0));
}

struct ShiftResult {
  double sigma;
  double D;
};

ShiftResult best_shift(const Snapshot& s, const Field1D& u, const ModeExpansion& e, double center, double halfwidth) {
  const double dx = u.grid().dx();
  auto shifted = [&](double sigma, Field1D& us, std::vector<Field1D>& as) {
    us = fourier_shift(u, sigma);
    as.clear();
    for (const auto& c : e.coeff) as.push_back(fourier_shift(c, sigma));
  };
  Field1D us(u.grid());
  std::vector<Field1D> as;
  shifted(center, us, as);
  const auto M = static_cast<std::ptrdiff_t>(std::ceil(halfwidth / dx));
  std::ptrdiff_t best = 0;
  double best_d = distance(s, us, as, 0);
  for (std::ptrdiff_t m = -M; m <= M; ++m) {
    const double d = distance(s, us, as, m);
    if (d < best_d) {
      best_d = d;
      best = m;
    }
  }
  const double mid = center + static_cast<double>(best) * dx;
  auto cost = [&](double sigma) {
    shifted(sigma, us, as);
    return distance(s, us, as, 0);
  };
  // Golden-section style refinement to about 1e-4 dx.
  const auto r = boost::math::tools::brent_find_minima(cost, mid - dx, mid + dx, 24);
  if (r.second <= best_d) return {r.first, r.second};
  return {mid, best_d};
}

}  // namespace

StabilityReport stability_experiment(const TwoScalePulse& pulse, const EigenDecomposition& decomp,
                                     const CoefficientSet& coeffs, const SolverConfig& cfg,
                                     const StabilityOptions& opts) {
  cfg.validate();
  if (!(opts.delta >= 0.0) || opts.delta > 0.1 * linf_norm(pulse.u))
    throw ValidationError("delta", "must lie in [0, 0.1 max|u|]");
  if (pulse.guiding.size() != decomp.modes.size()) throw InvalidArgument("stability_experiment: mode count mismatch");
  const MacroGrid& grid = pulse.u.grid();
  const CellGrid& cell = pulse.v.cell();
  const ModeExpansion e = expand(pulse, decomp);

  const double x0 = grid.x(grid.size() / 2) + opts.bump_offset;
  const Field1D bump =
      Field1D::from_function(grid, [&](double x) { return std::exp(-std::pow((x - x0) / opts.bump_width, 2)); });
  TwoScaleState state{0.0, pulse.u, pulse.v};
  if (opts.translate != 0.0) {
    state.U = fourier_shift(pulse.u, opts.translate);
    state.V = TwoScaleField(grid, cell);
    for (std::size_t i = 0; i < e.phi.size(); ++i) {
      const Field1D a = fourier_shift(e.coeff[i], opts.translate);
      for (std::size_t j = 0; j < grid.size(); ++j)
        for (std::size_t k = 0; k < cell.size(); ++k) state.V(j, k) += a[j] * e.phi[i][k];
    }
  }
  for (std::size_t j = 0; j < grid.size(); ++j) state.U[j] += opts.delta * bump[j];
  if (opts.cell_mode) {
    const double km = 2.0 * std::numbers::pi * static_cast<double>(*opts.cell_mode);
    for (std::size_t j = 0; j < grid.size(); ++j)
      for (std::size_t k = 0; k < cell.size(); ++k)
        state.V(j, k) += opts.delta * bump[j] * std::sqrt(2.0) * std::sin(km * cell.y(k));
  }

  StabilityReport rep;
  rep.delta = opts.delta;
  rep.c = pulse.c;
  double s_prev = 0.0;
  TwoScaleSolver solver(grid, cell, coeffs, cfg);
  run<TwoScaleState>(state, solver, cfg, [&](const TwoScaleState& st) {
    const Snapshot snap = snapshot(st, e);
    const auto best = best_shift(snap, pulse.u, e, pulse.c * st.t + s_prev, opts.search_halfwidth);
    s_prev = best.sigma - pulse.c * st.t;
    rep.times.push_back(st.t);
    rep.distances.push_back(best.D);
    rep.shifts.push_back(s_prev);
  });
  rep.z1 = rep.shifts.back();

  const auto& D = rep.distances;
  if (opts.delta > 0.0 && D.back() > D.front()) throw NotDecaying("stability_experiment: D(t_end) > D(0)");
  if (D.size() < 3) return rep;

  std::size_t i0 = 0;
  while (i0 < D.size() && rep.times[i0] < opts.fit_start) ++i0;
  const double dmin = *std::min_element(D.begin() + static_cast<std::ptrdiff_t>(i0), D.end());
  std::size_t i1 = i0;
  while (i1 < D.size() && D[i1] > opts.floor_factor * dmin) ++i1;
  std::vector<double> t, ld;
  for (std::size_t k = i0; k < i1; ++k) {
    t.push_back(rep.times[k]);
    ld.push_back(std::log(D[k]));
  }
  if (t.size() >= 3) {
    const auto f = linear_fit(t, ld);
    rep.kappa = -f.slope;
    rep.r2 = f.r2;
    rep.fit_t0 = t.front();
    rep.fit_t1 = t.back();
  }
  if (opts.delta > 0.0)
    for (std::size_t k = 0; k < std::max<std::size_t>(i1, 1); ++k)
      rep.K3_effective = std::max(rep.K3_effective, D[k] * std::exp(rep.kappa * rep.times[k]) / opts.delta);
  return rep;
}

}  // namespace tsfhn
