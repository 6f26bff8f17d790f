#include "tsfhn/guiding.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>

#include "tsfhn/errors.hpp"

namespace tsfhn {

bool GuidingState::all_finite() const noexcept {
  if (!u.all_finite()) return false;
  for (const auto& vi : v)
    if (!vi.all_finite()) return false;
  return true;
}

double GuidingState::sup_norm() const noexcept {
  double m = linf_norm(u);
  for (const auto& vi : v) m = std::max(m, linf_norm(vi));
  return m;
}

GuidingStepper::GuidingStepper(const MacroGrid& grid, GuidingParams params, CubicNonlinearity f, double dt,
                               double blowup_ceiling)
    : grid_(grid), params_(std::move(params)), f_(f), dt_(dt), ceiling_(blowup_ceiling) {
  if (!(dt > 0.0)) throw InvalidArgument("guiding: dt must be positive");
  params_.validate();
  const auto k = wavenumbers(grid_);
  denom_.resize(k.size());
  for (std::size_t m = 0; m < k.size(); ++m) denom_[m] = 1.0 / (1.0 + dt_ * k[m] * k[m]);
  rhs_.resize(grid_.size());
  spec_.resize(k.size());
}

void GuidingStepper::step(GuidingState& s) {
  require_same_grid(grid_, s.u.grid(), "guiding step");
  if (s.v.size() != params_.m) throw InvalidArgument("guiding step: state has wrong number of inhibitors");
  const std::size_t n = grid_.size();
  auto u = s.u.values();
  for (std::size_t j = 0; j < n; ++j) {
    double inhib = 0.0;
    for (std::size_t i = 0; i < params_.m; ++i) inhib += params_.alpha[i] * s.v[i][j];
    rhs_[j] = u[j] + dt_ * (f_(u[j]) - inhib);
  }
  for (std::size_t i = 0; i < params_.m; ++i) {
    auto vi = s.v[i].values();
    const double beta = params_.beta[i];
    const double ex = params_.lambda_explicit.empty() ? params_.lambda[i] : params_.lambda_explicit[i];
    const double inv = 1.0 / (1.0 + dt_ * (params_.lambda[i] - ex));
    for (std::size_t j = 0; j < n; ++j) vi[j] = (vi[j] + dt_ * (-ex * vi[j] + beta * u[j])) * inv;
  }
  auto& fft = detail::cached_fft(n);
  fft.forward(rhs_, spec_);
  for (std::size_t m = 0; m < spec_.size(); ++m) spec_[m] *= denom_[m];
  fft.inverse(spec_, u);
  s.t += dt_;
  const double sup = s.sup_norm();
  if (!(sup <= ceiling_)) throw BlowUp("guiding system exceeded the blow-up ceiling", s.t);
}

GuidingState step_guiding(const GuidingState& s, const GuidingParams& params, const CubicNonlinearity& f,
                          double dt, double blowup_ceiling) {
  GuidingStepper stepper(s.u.grid(), params, f, dt, blowup_ceiling);
  GuidingState out = s;
  stepper.step(out);
  return out;
}

GuidingState seed_bump(const MacroGrid& grid, std::size_t m, const SeedSpec& seed) {
  if (!(seed.width > 0.0) || !(seed.width < grid.half_length()))
    throw InvalidArgument("seed_bump: width must lie in (0, L)");
  GuidingState s{0.0, Field1D::from_function(grid, [&](double x) {
                   const double r = (x - seed.center) / seed.width;
                   return seed.height * std::exp(-r * r);
                 }),
                 std::vector<Field1D>(m, Field1D(grid))};
  if (m > 0 && seed.preload != 0.0) {
    s.v[0] = Field1D::from_function(grid, [&](double x) {
      if (x <= seed.center) return 0.0;
      const double r = (x - seed.center) / seed.preload_width;
      return seed.preload * std::exp(-r * r);
    });
  }
  return s;
}

std::size_t peak_index(const Field1D& u) {
  const auto v = u.values();
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double peak_position(const Field1D& u) {
  const std::size_t n = u.size();
  const std::size_t j = peak_index(u);
  const double ym = u[(j + n - 1) % n], y0 = u[j], yp = u[(j + 1) % n];
  const double den = ym - 2.0 * y0 + yp;
  double off = den < 0.0 ? 0.5 * (ym - yp) / den : 0.0;
  off = std::clamp(off, -0.5, 0.5);
  return u.grid().x(j) + off * u.grid().dx();
}

GuidingHistory::GuidingHistory(double dt_obs, std::size_t keep_states) : dt_obs_(dt_obs), keep_(keep_states) {
  if (!(dt_obs > 0.0)) throw InvalidArgument("history: dt_obs must be positive");
  if (keep_states < 1) throw InvalidArgument("history: must keep at least one state");
}

void GuidingHistory::observe(const GuidingState& s) {
  track_.push_back({s.t, peak_position(s.u), linf_norm(s.u)});
  recent_.push_back(s);
  while (recent_.size() > keep_) recent_.pop_front();
}

double fit_speed(const std::vector<TrackPoint>& track, double period) {
  if (track.size() < 2) throw InvalidArgument("fit_speed: need at least two track points");
  const std::size_t start = track.size() >= 4 ? track.size() / 2 : 0;
  std::vector<double> t, p;
  double offset = 0.0;
  for (std::size_t k = start; k < track.size(); ++k) {
    if (!p.empty()) {
      const double raw_prev = p.back() - offset;
      const double d = track[k].position - raw_prev;
      if (d > 0.5 * period) offset -= period;
      else if (d < -0.5 * period) offset += period;
    }
    t.push_back(track[k].t);
    p.push_back(track[k].position + offset);
  }
  const double c = -linear_fit(t, p).slope;
  return std::abs(c) < 1e-6 ? 0.0 : c;
}

Field1D roll(const Field1D& f, std::ptrdiff_t shift) {
  const auto n = static_cast<std::ptrdiff_t>(f.size());
  Field1D out(f.grid());
  const std::ptrdiff_t s = ((shift % n) + n) % n;
  for (std::ptrdiff_t j = 0; j < n; ++j) out[static_cast<std::size_t>((j + s) % n)] = f[static_cast<std::size_t>(j)];
  return out;
}

namespace {

struct Window {
  std::size_t lo, hi;  // inclusive index range on the recentred grid
};

double masked_diff(const Field1D& a, const Field1D& b, Window w) {
  double m = 0.0;
  for (std::size_t j = w.lo; j <= w.hi; ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

}  // namespace

GuidingPulse extract_pulse(const GuidingHistory& history, const ExtractOptions& opts) {
  if (history.recent().empty() || history.track().size() < 2)
    throw InvalidArgument("extract_pulse: history too short");
  const GuidingState& last = history.recent().back();
  const MacroGrid& grid = last.u.grid();
  const std::size_t n = grid.size();
  if (linf_norm(last.u) < opts.pulse_floor) throw NoPulse("extract_pulse: max |u| below pulse floor");

  GuidingPulse p{fit_speed(history.track(), grid.length()), Field1D(grid), {}, std::nullopt, {}, 0.0, 0.0};
  const auto shift = static_cast<std::ptrdiff_t>(n / 2) - static_cast<std::ptrdiff_t>(peak_index(last.u));
  p.u = roll(last.u, shift);
  for (const auto& vi : last.v) p.v.push_back(roll(vi, shift));

  const double dx = grid.dx();
  const std::size_t mid = n / 2;
  Window w{0, n - 1};
  if (opts.settle_ahead) w.lo = mid - std::min<std::size_t>(mid, static_cast<std::size_t>(*opts.settle_ahead / dx));
  if (opts.settle_behind)
    w.hi = mid + std::min<std::size_t>(n - 1 - mid, static_cast<std::size_t>(*opts.settle_behind / dx));

  if (history.recent().size() >= 2) {
    const GuidingState& prev = history.recent()[history.recent().size() - 2];
    const double span = last.t - prev.t;
    std::vector<Field1D> a{roll(prev.u, shift)}, b{p.u};
    for (std::size_t i = 0; i < prev.v.size(); ++i) {
      a.push_back(roll(prev.v[i], shift));
      b.push_back(p.v[i]);
    }
    auto resid = [&](double s) {
      double m = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, masked_diff(fourier_shift(a[i], s), b[i], w));
      return m;
    };
    const double s0 = p.c * span;
    const auto best = boost::math::tools::brent_find_minima(resid, s0 - dx, s0 + dx, 30);
    p.settle_residual = best.second / span;
  }

  p.tails = fit_two_sided(p.u.values(), mid, dx, opts.tail_lo, opts.tail_hi, opts.min_tail_samples);
  p.sigma = p.tails.rate();
  p.boundary_u = std::max(std::abs(p.u[0]), std::abs(p.u[n - 1]));
  if (p.settle_residual > opts.settle_tol && !opts.allow_unsettled)
    throw NotSettled("extract_pulse: profile still drifting", p.settle_residual);
  return p;
}

}  // namespace tsfhn
