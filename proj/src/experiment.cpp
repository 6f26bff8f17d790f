#include "tsfhn/experiment.hpp"

#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tsfhn/csv.hpp"
#include "tsfhn/errors.hpp"
#include "tsfhn/format.hpp"
#include "tsfhn/simulators.hpp"
#include "tsfhn/spectral.hpp"
#include "tsfhn/verify.hpp"

namespace tsfhn {

bool Check::pass() const {
  switch (relation) {
    case Relation::AtMost: return value <= bound;
    case Relation::AtLeast: return value >= bound;
    case Relation::Above: return value > bound;
    case Relation::Info: return true;
  }
  return false;
}

std::string Check::status() const {
  if (relation == Relation::Info) return "info";
  if (pass()) return "pass";
  return asserted ? "fail" : "waived";
}

Check at_most(std::string name, double value, double bound, bool asserted) {
  return {std::move(name), value, Check::Relation::AtMost, bound, asserted};
}
Check at_least(std::string name, double value, double bound, bool asserted) {
  return {std::move(name), value, Check::Relation::AtLeast, bound, asserted};
}
Check above(std::string name, double value, double bound, bool asserted) {
  return {std::move(name), value, Check::Relation::Above, bound, asserted};
}
Check info(std::string name, double value) { return {std::move(name), value, Check::Relation::Info, 0.0, false}; }

bool ExperimentResult::passed() const {
  if (!error.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.asserted || c.pass(); });
}

GuidingSetup guiding_setup(const ExperimentConfig& cfg, const CellGrid& cell) {
  GuidingSetup s;
  if (cfg.guiding.alpha) {
    s.params.m = 1;
    s.params.alpha = {*cfg.guiding.alpha};
    s.params.beta = {*cfg.guiding.beta};
    s.params.lambda = {*cfg.guiding.lambda};
  } else {
    s.decomp = decompose(cfg.coeffs, cell);
    s.params = guiding_params(*s.decomp, cfg.coeffs);
  }
  s.params.validate();
  return s;
}

GuidingRun run_guiding(const ExperimentConfig& cfg, const GuidingSetup& setup, std::size_t snapshots) {
  const MacroGrid grid(cfg.grid.half_length, cfg.grid.n_x);
  SolverConfig sc = cfg.solver;
  sc.t_end = cfg.guiding.t_end;
  sc.validate();
  const std::size_t steps = sc.steps();
  const std::size_t n_obs = steps / sc.observe_every;

  GuidingState s = seed_bump(grid, setup.params.m, cfg.seed);
  GuidingStepper stepper(grid, setup.params, cfg.coeffs.f, sc.dt, sc.blowup_ceiling);
  GuidingHistory history(sc.dt * static_cast<double>(sc.observe_every));
  std::vector<GuidingState> samples;
  history.observe(s);
  std::size_t next = 1;
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(s);
    if (k % sc.observe_every != 0) continue;
    history.observe(s);
    const std::size_t obs = k / sc.observe_every;
    // snapshot i sits at observation round(i * n_obs / snapshots)
    if (next <= snapshots && obs * snapshots >= next * n_obs) {
      samples.push_back(s);
      ++next;
    }
  }

  ExtractOptions eo;
  eo.settle_tol = cfg.guiding.settle_tol;
  eo.settle_ahead = cfg.guiding.settle_ahead;
  eo.settle_behind = cfg.guiding.settle_behind;
  eo.allow_unsettled = cfg.guiding.allow_unsettled;
  return {extract_pulse(history, eo), history.track(), std::move(samples)};
}

TwoScaleField lift_guiding(const std::vector<Field1D>& v, const GuidingSetup& setup, const CoefficientSet& coeffs,
                           const CellGrid& cell) {
  if (v.size() != setup.params.m) throw InvalidArgument("lift_guiding: wrong number of components");
  if (v.empty()) throw InvalidArgument("lift_guiding: no components");
  std::vector<std::vector<double>> shapes;
  std::vector<double> scale;
  if (setup.decomp) {
    if (!(setup.decomp->cell == cell)) throw GridMismatch("lift_guiding: decomposition on another cell grid");
    for (const auto& m : setup.decomp->modes) {
      shapes.push_back(m.shape);
      scale.push_back(m.norm);
    }
  } else {
    shapes.push_back(coeffs.alpha.sample(cell));
    scale.push_back(setup.params.alpha[0]);
  }
  const MacroGrid& grid = v[0].grid();
  TwoScaleField V(grid, cell);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    auto row = V.row(j);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double a = v[i][j] / scale[i];
      for (std::size_t k = 0; k < cell.size(); ++k) row[k] += a * shapes[i][k];
    }
  }
  return V;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Context {
  const ExperimentConfig& cfg;
  std::filesystem::path dir;
  std::ostream* log;
  ExperimentResult& res;
  MacroGrid grid;
  CellGrid cell;

  void note(const std::string& msg) const {
    if (log) *log << msg << std::endl;
  }

  std::string name(std::string_view kind, const std::string& tag) const {
    return std::string(kind) + "_" + cfg.preset + "_" + tag + ".csv";
  }

  CsvWriter csv(const std::string& file, const std::vector<std::string>& header) {
    res.files.push_back(file);
    return CsvWriter(dir / file, header);
  }

  void check(Check c) { res.checks.push_back(std::move(c)); }
};

std::string eps_tag(double eps) { return fmt_short(eps); }
/// Solver time accumulates dt; tags use it rounded to 1e-9.
std::string time_tag(double t) { return "t" + fmt_short(std::round(t * 1e9) / 1e9); }

double obs_time(const ExperimentConfig& cfg, std::size_t obs) {
  return static_cast<double>(obs * cfg.solver.observe_every) * cfg.solver.dt;
}

/// Writes the observation when it is a multiple of sample_every or the last one.
bool keep_sample(const ExperimentConfig& cfg, std::size_t obs, std::size_t n_obs) {
  return obs % cfg.output.sample_every == 0 || obs == n_obs;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct GrowthTracker {
  GrowthBound bound;
  double worst = 0.0;

  GrowthTracker(const CoefficientSet& coeffs, double initial_sup) : bound(growth_bound(coeffs, initial_sup)) {}
  void add(double t, double sup) { worst = std::max(worst, sup / bound.at(t)); }
};

struct Initial {
  Field1D U;
  TwoScaleField V;
  std::optional<GuidingSetup> setup;
  /// w with V = w(x) alpha(y) exactly, when the data has that form
  std::optional<Field1D> alpha_factor;
};

std::optional<Field1D> alpha_factor(const TwoScaleField& V, const GuidingSetup& setup, const CoefficientSet& coeffs) {
  if (setup.params.m != 1) return std::nullopt;
  const CellGrid& cell = V.cell();
  const auto alpha = coeffs.alpha.sample(cell);
  const double a2 = cell_inner(alpha, alpha);
  if (!(a2 > 0.0)) return std::nullopt;
  Field1D w(V.macro());
  double err = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = cell_inner(V.row(j), alpha) / a2;
    for (std::size_t k = 0; k < cell.size(); ++k) err = std::max(err, std::abs(V(j, k) - w[j] * alpha[k]));
  }
  if (err > 1e-14 * std::max(max_abs(V.values()), 1e-300)) return std::nullopt;
  return w;
}

/// v^eps(0) = R_eps V(0); for V = w alpha the oscillation is evaluated exactly
/// instead of interpolated across a jump of alpha.
Field1D eps_initial_v(const Initial& init, const CoefficientSet& coeffs, double eps) {
  if (!init.alpha_factor) return reconstruct(init.V, eps);
  const Field1D& w = *init.alpha_factor;
  Field1D v(w.grid());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double y = w.grid().x(j) / eps;
    v[j] = w[j] * coeffs.alpha(y - std::floor(y));
  }
  return v;
}

Initial make_initial(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.initial == InitialSource::Seed) {
    std::optional<GuidingSetup> setup;
    try {
      setup = guiding_setup(cfg, ctx.cell);
    } catch (const UnsupportedOperator&) {
      ctx.note("no guiding decomposition; seeding U only");
    }
    const GuidingState s = seed_bump(ctx.grid, setup ? setup->params.m : 1, cfg.seed);
    TwoScaleField V = setup ? lift_guiding(s.v, *setup, cfg.coeffs, ctx.cell) : TwoScaleField(ctx.grid, ctx.cell);
    auto w = setup ? alpha_factor(V, *setup, cfg.coeffs) : std::nullopt;
    return {s.u, std::move(V), std::move(setup), std::move(w)};
  }
  GuidingSetup setup = guiding_setup(cfg, ctx.cell);
  ctx.note("guiding run to t = " + fmt_short(cfg.guiding.t_end));
  GuidingRun g = run_guiding(cfg, setup);
  ctx.check(info("initial_pulse_speed", g.pulse.c));
  ctx.check(info("initial_pulse_settle_residual", g.pulse.settle_residual));
  TwoScaleField V = setup.decomp ? assemble(g.pulse, *setup.decomp, cfg.coeffs.beta.sample(ctx.cell)).v
                                 : lift_guiding(g.pulse.v, setup, cfg.coeffs, ctx.cell);
  auto w = alpha_factor(V, setup, cfg.coeffs);
  return {g.pulse.u, std::move(V), std::move(setup), std::move(w)};
}


// ---------------------------------------------------------------------------

/// The cell average obeys Vbar_t = -b Vbar + mean(beta) U when b is constant,
/// so it stays zero from zero data when beta has zero mean.
bool zero_average_expected(const ExperimentConfig& cfg, const TwoScaleField& V0) {
  const auto beta = cfg.coeffs.beta.sample(V0.cell());
  double beta_mean = 0.0;
  for (double x : beta) beta_mean += x * V0.cell().dy();
  return cfg.coeffs.b.is_constant() && std::abs(beta_mean) <= 1e-15 * max_abs(beta) &&
         linf_norm(V0.cell_average()) <= 1e-15 * std::max(1.0, max_abs(V0.values()));
}

/// With one guiding mode, beta in its span, d = 0 and alpha^2 constant, V stays
/// alpha(y) w(x) and alpha_eps v^eps = alpha^2 w, so u^eps does not depend on eps.
bool eps_independent_u(const ExperimentConfig& cfg, const Initial& init, const CellGrid& cell) {
  if (!init.setup || !init.setup->decomp || init.setup->params.m != 1) return false;
  if (!cfg.coeffs.d.is_zero() || !cfg.coeffs.b.is_constant()) return false;
  const auto beta = cfg.coeffs.beta.sample(cell);
  if (init.setup->params.beta_plus_norm > 1e-12 * std::max(cell_norm(beta), 1e-300)) return false;
  const auto alpha = cfg.coeffs.alpha.sample(cell);
  for (double a : alpha)
    if (std::abs(a * a - alpha[0] * alpha[0]) > 1e-14 * alpha[0] * alpha[0]) return false;
  return true;
}

void simulate_eps(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Initial init = make_initial(ctx);
  const std::size_t steps = cfg.solver.steps();
  const std::size_t n_obs = steps / cfg.solver.observe_every;
  const std::size_t n = cfg.epsilons.size();

  // all eps-systems advance together so that u can be compared across eps
  std::vector<EpsSolver> solvers;
  std::vector<EpsState> states;
  std::vector<GrowthTracker> growth;
  std::vector<CsvWriter> out;
  std::vector<double> late_min_peak(n, std::numeric_limits<double>::infinity());
  solvers.reserve(n);
  states.reserve(n);
  growth.reserve(n);
  out.reserve(n);
  for (double eps : cfg.epsilons) {
    solvers.emplace_back(ctx.grid, cfg.coeffs, eps, cfg.solver);
    states.push_back(EpsState{0.0, eps, init.U, eps_initial_v(init, cfg.coeffs, eps)});
    growth.emplace_back(cfg.coeffs, states.back().sup_norm());
    out.push_back(ctx.csv(ctx.name("simulate-eps", eps_tag(eps)), {"t", "x", "u", "v"}));
  }
  double spread = 0.0;
  const double transient = cfg.solver.t_end >= 200.0 ? 100.0 : 0.5 * cfg.solver.t_end;

  auto observe = [&](std::size_t obs) {
    for (std::size_t e = 0; e < n; ++e) {
      const EpsState& s = states[e];
      growth[e].add(s.t, s.sup_norm());
      if (obs_time(cfg, obs) >= transient) late_min_peak[e] = std::min(late_min_peak[e], linf_norm(s.u));
      if (e > 0) spread = std::max(spread, linf_norm(s.u - states[0].u));
      if (!keep_sample(cfg, obs, n_obs)) continue;
      for (std::size_t j = 0; j < ctx.grid.size(); j += cfg.output.x_stride)
        out[e].row({obs_time(cfg, obs), ctx.grid.x(j), s.u[j], s.v[j]});
    }
  };

  ctx.note("eps-systems to t = " + fmt_short(cfg.solver.t_end));
  observe(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    for (std::size_t e = 0; e < n; ++e) solvers[e].step(states[e]);
    if (k % cfg.solver.observe_every == 0) observe(k / cfg.solver.observe_every);
  }
  for (std::size_t e = 0; e < n; ++e) {
    const std::string tag = eps_tag(cfg.epsilons[e]);
    ctx.check(at_most("growth_ratio_eps" + tag, growth[e].worst, 1.0));
    ctx.check(info("max_u_min_after_transient_eps" + tag, late_min_peak[e]));
  }
  ctx.check(info("transient_end", transient));
  if (n > 1) {
    if (eps_independent_u(cfg, init, ctx.cell)) ctx.check(at_most("u_spread_across_eps", spread, 1e-8));
    else ctx.check(info("u_spread_across_eps", spread));
  }
}

void simulate_twoscale(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Initial init = make_initial(ctx);
  const std::size_t steps = cfg.solver.steps();
  const std::size_t n_obs = steps / cfg.solver.observe_every;

  TwoScaleSolver solver(ctx.grid, ctx.cell, cfg.coeffs, cfg.solver);
  TwoScaleState s{0.0, init.U, init.V};
  GrowthTracker growth(cfg.coeffs, s.sup_norm());

  const bool zero_average = zero_average_expected(cfg, init.V);
  const auto beta = cfg.coeffs.beta.sample(ctx.cell);
  double avg_peak = 0.0, v_peak = 0.0;

  // With beta inside the span of the guiding modes and a single mode, V stays
  // v_1 alpha~_1 / alpha_1 and the guiding system predicts the cell average.
  std::optional<GuidingState> companion;
  std::optional<GuidingStepper> companion_stepper;
  std::vector<double> mode_mean;
  if (init.setup && init.setup->decomp && init.setup->params.beta_plus_norm <= 1e-12 * std::max(cell_norm(beta), 1e-300)) {
    const auto& dec = *init.setup->decomp;
    GuidingState g{0.0, init.U, {}};
    for (std::size_t i = 0; i < dec.modes.size(); ++i) g.v.emplace_back(ctx.grid);
    for (std::size_t j = 0; j < ctx.grid.size(); ++j) {
      const Projection p = project(dec, init.V.row(j));
      for (std::size_t i = 0; i < p.guiding.size(); ++i) g.v[i][j] = p.guiding[i];
    }
    for (const auto& m : dec.modes) {
      double mean = 0.0;
      for (double x : m.shape) mean += x * ctx.cell.dy();
      mode_mean.push_back(mean / m.norm);
    }
    companion = std::move(g);
    companion_stepper.emplace(ctx.grid, init.setup->params, cfg.coeffs.f, cfg.solver.dt, cfg.solver.blowup_ceiling);
  }
  double companion_avg_err = 0.0, companion_u_err = 0.0;

  CsvWriter out = ctx.csv(ctx.name("simulate-twoscale", "none"), {"t", "x", "U", "Vbar"});
  const std::size_t n_snap = std::min(cfg.output.snapshots, n_obs);
  std::size_t next_snap = 1;

  auto observe = [&](std::size_t obs) {
    growth.add(s.t, s.sup_norm());
    const Field1D avg = s.V.cell_average();
    avg_peak = std::max(avg_peak, linf_norm(avg));
    v_peak = std::max(v_peak, max_abs(s.V.values()));
    if (companion) {
      double e = 0.0;
      for (std::size_t j = 0; j < ctx.grid.size(); ++j) {
        double pred = 0.0;
        for (std::size_t i = 0; i < mode_mean.size(); ++i) pred += companion->v[i][j] * mode_mean[i];
        e = std::max(e, std::abs(avg[j] - pred));
      }
      companion_avg_err = std::max(companion_avg_err, e);
      companion_u_err = std::max(companion_u_err, linf_norm(s.U - companion->u));
    }
    if (keep_sample(cfg, obs, n_obs))
      for (std::size_t j = 0; j < ctx.grid.size(); j += cfg.output.x_stride)
        out.row({obs_time(cfg, obs), ctx.grid.x(j), s.U[j], avg[j]});
    if (next_snap <= n_snap && obs * n_snap >= next_snap * n_obs) {
      CsvWriter snap = ctx.csv(ctx.name("simulate-twoscale-snapshot", time_tag(obs_time(cfg, obs))), {"x", "y", "V"});
      for (std::size_t j = 0; j < ctx.grid.size(); j += cfg.output.x_stride)
        for (std::size_t k = 0; k < ctx.cell.size(); k += cfg.output.y_stride)
          snap.row({ctx.grid.x(j), ctx.cell.y(k), s.V(j, k)});
      ++next_snap;
    }
  };

  ctx.note("two-scale run to t = " + fmt_short(cfg.solver.t_end));
  observe(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    solver.step(s);
    if (companion) companion_stepper->step(*companion);
    if (k % cfg.solver.observe_every == 0) observe(k / cfg.solver.observe_every);
  }
  ctx.check(at_most("growth_ratio", growth.worst, 1.0));
  const double avg_rel = v_peak > 0.0 ? avg_peak / v_peak : 0.0;
  ctx.check(zero_average ? at_most("cell_average_relative", avg_rel, 1e-8) : info("cell_average_relative", avg_rel));
  if (companion) {
    ctx.check(at_most("cell_average_vs_guiding", companion_avg_err, 1e-3));
    ctx.check(info("U_vs_guiding_u", companion_u_err));
  }
}

void build_pulse(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const GuidingSetup setup = guiding_setup(cfg, ctx.cell);
  const std::size_t m = setup.params.m;
  ctx.note("guiding run to t = " + fmt_short(cfg.guiding.t_end));
  const GuidingRun g = run_guiding(cfg, setup, cfg.output.snapshots);
  const GuidingPulse& p = g.pulse;
  const bool strict = !cfg.guiding.allow_unsettled;

  std::vector<std::string> cols{"t", "x", "u"};
  for (std::size_t i = 1; i <= m; ++i) cols.push_back("v_" + std::to_string(i));
  for (const auto& s : g.samples) {
    CsvWriter out = ctx.csv(ctx.name("guiding-history", time_tag(s.t)), cols);
    for (std::size_t j = 0; j < ctx.grid.size(); j += cfg.output.x_stride) {
      std::vector<double> row{std::round(s.t * 1e9) / 1e9, ctx.grid.x(j), s.u[j]};
      for (const auto& v : s.v) row.push_back(v[j]);
      out.row(row);
    }
  }
  {
    CsvWriter out = ctx.csv(ctx.name("guiding-track", "none"), {"t", "position", "max_u"});
    for (const auto& tp : g.track) out.row({tp.t, tp.position, tp.max_u});
  }

  const std::size_t mid = ctx.grid.size() / 2;
  auto z = [&](std::size_t j) { return ctx.grid.x(j) - ctx.grid.x(mid); };
  {
    cols = {"z", "u"};
    for (std::size_t i = 1; i <= m; ++i) cols.push_back("v_" + std::to_string(i));
    CsvWriter out = ctx.csv(ctx.name("pulse", "none"), cols);
    for (std::size_t j = 0; j < ctx.grid.size(); ++j) {
      std::vector<double> row{z(j), p.u[j]};
      for (const auto& v : p.v) row.push_back(v[j]);
      out.row(row);
    }
  }

  ctx.check(at_most("settle_residual", p.settle_residual, cfg.guiding.settle_tol, strict));
  ctx.check(above("speed", p.c, 0.0));
  ctx.check(above("tail_rate", p.sigma.value_or(kNaN), 0.0, strict));
  ctx.check(info("boundary_u", p.boundary_u));
  for (std::size_t i = 0; i < m; ++i) {
    const double lam = setup.params.lambda[i];
    const Field1D conv = convolve_mode(p.u, setup.params.beta[i], lam, p.c);
    ctx.check(at_most("convolution_vs_evolved_v" + std::to_string(i + 1), linf_norm(conv - p.v[i]), 1e-4, strict));
  }

  TwoScaleField V(ctx.grid, ctx.cell);
  if (setup.decomp) {
    const TwoScalePulse tp = assemble(p, *setup.decomp, cfg.coeffs.beta.sample(ctx.cell));
    const ComovingResidual r = comoving_residual(tp, cfg.coeffs);
    ctx.check(at_most("pulse_residual_u_l2", r.u_l2, 1e-3, strict));
    ctx.check(at_most("pulse_residual_v_l2", r.v_l2, 1e-3, strict));
    try {
      // per side: on a ring the side ahead of the pulse also sees the wrapped wake
      const DecayReport d = decay_report(tp);
      auto sides = [&](const std::string& what, const TwoSidedTail& t) {
        ctx.check(info(what + "_ahead", t.ahead ? t.ahead->rate : kNaN));
        ctx.check(info(what + "_behind", t.behind ? t.behind->rate : kNaN));
      };
      sides("decay_v", d.v_norm);
      sides("decay_vz", d.vz_norm);
      sides("decay_u", d.u);
    } catch (const TailTooShort& e) {
      ctx.note(std::string("decay rates skipped: ") + e.what());
    }
    V = tp.v;
    if (m == 1 && setup.params.beta_plus_norm <= 1e-12 * std::max(cell_norm(cfg.coeffs.beta.sample(ctx.cell)), 1e-300)) {
      // v(z, y) / alpha(y) must not depend on y
      const auto alpha = cfg.coeffs.alpha.sample(ctx.cell);
      double spread = 0.0;
      for (std::size_t j = 0; j < ctx.grid.size(); ++j) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t k = 0; k < ctx.cell.size(); ++k) {
          if (std::abs(alpha[k]) < 1e-12) continue;
          const double q = V(j, k) / alpha[k];
          lo = std::min(lo, q);
          hi = std::max(hi, q);
        }
        if (hi >= lo) spread = std::max(spread, hi - lo);
      }
      const double peak = max_abs(V.values());
      ctx.check(at_most("rank1_spread_relative", peak > 0.0 ? spread / peak : 0.0, 1e-12));
    }
  } else {
    V = lift_guiding(p.v, setup, cfg.coeffs, ctx.cell);
  }

  CsvWriter dense = ctx.csv(ctx.name("pulse-dense", "none"), {"z", "y", "v"});
  for (std::size_t j = 0; j < ctx.grid.size(); j += cfg.output.x_stride)
    for (std::size_t k = 0; k < ctx.cell.size(); k += cfg.output.y_stride) dense.row({z(j), ctx.cell.y(k), V(j, k)});
}

void verify_convergence(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Initial init = make_initial(ctx);
  const std::size_t steps = cfg.solver.steps();
  const std::size_t every = cfg.solver.observe_every;
  const auto& eps = cfg.epsilons;

  ctx.note("two-scale reference to t = " + fmt_short(cfg.solver.t_end));
  std::vector<Field1D> Us;
  std::vector<std::vector<Field1D>> RV(eps.size());
  {
    TwoScaleSolver solver(ctx.grid, ctx.cell, cfg.coeffs, cfg.solver);
    TwoScaleState s{0.0, init.U, init.V};
    GrowthTracker growth(cfg.coeffs, s.sup_norm());
    double avg_peak = 0.0, v_peak = 0.0;
    auto observe = [&] {
      growth.add(s.t, s.sup_norm());
      avg_peak = std::max(avg_peak, linf_norm(s.V.cell_average()));
      v_peak = std::max(v_peak, max_abs(s.V.values()));
      Us.push_back(s.U);
      for (std::size_t e = 0; e < eps.size(); ++e) RV[e].push_back(reconstruct(s.V, eps[e]));
    };
    observe();
    for (std::size_t k = 1; k <= steps; ++k) {
      solver.step(s);
      if (k % every == 0) observe();
    }
    ctx.check(at_most("growth_ratio_twoscale", growth.worst, 1.0));
    const double avg_rel = v_peak > 0.0 ? avg_peak / v_peak : 0.0;
    ctx.check(zero_average_expected(cfg, init.V) ? at_most("cell_average_relative", avg_rel, 1e-8)
                                                 : info("cell_average_relative", avg_rel));
  }

  std::vector<ErrorSeries> series;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    ctx.note("eps-system, eps = " + fmt_short(eps[e]));
    EpsSolver solver(ctx.grid, cfg.coeffs, eps[e], cfg.solver);
    EpsState s{0.0, eps[e], init.U, eps_initial_v(init, cfg.coeffs, eps[e])};
    GrowthTracker growth(cfg.coeffs, s.sup_norm());
    ErrorAccumulator acc(eps[e]);
    std::size_t obs = 0;
    auto observe = [&] {
      growth.add(s.t, s.sup_norm());
      acc.add(s.t, s.u, s.v, Us[obs], RV[e][obs]);
      ++obs;
    };
    observe();
    for (std::size_t k = 1; k <= steps; ++k) {
      solver.step(s);
      if (k % every == 0) observe();
    }
    RV[e].clear();
    ctx.check(at_most("growth_ratio_eps" + eps_tag(eps[e]), growth.worst, 1.0));

    const ErrorSeries& S = acc.series();
    CsvWriter out = ctx.csv(ctx.name("verify-convergence", eps_tag(eps[e])),
                            {"t", "u_err_l2", "v_err_l2", "u_err_linf", "v_err_linf", "grad_err"});
    for (std::size_t i = 0; i < S.size(); ++i)
      out.row({S.times[i], S.u_err_l2[i], S.v_err_l2[i], S.u_err_linf[i], S.v_err_linf[i], S.grad_err[i]});
    ctx.check(info("max_error_eps" + eps_tag(eps[e]), S.max_combined()));
    ctx.check(info("grad_error_eps" + eps_tag(eps[e]), S.grad_err.back()));
    series.push_back(S);
  }

  const RateFit fit = fit_rate(series);
  {
    CsvWriter out = ctx.csv(ctx.name("verify-convergence-rate", "none"), {"epsilon", "max_error", "fitted"});
    for (std::size_t i = 0; i < fit.epsilons.size(); ++i)
      out.row({fit.epsilons[i], fit.max_errors[i], std::exp(fit.intercept) * std::pow(fit.epsilons[i], fit.slope)});
  }
  ctx.check(at_least("rate_slope_min", fit.slope, 0.7));
  ctx.check(at_most("rate_slope_max", fit.slope, 1.3));
  ctx.check(at_least("rate_monotone", fit.monotone ? 1.0 : 0.0, 1.0));
  ctx.check(info("rate_r2", fit.r2));
}

void verify_stability(Context& ctx) {
  const auto& cfg = ctx.cfg;
  GuidingSetup setup = guiding_setup(cfg, ctx.cell);
  if (!setup.decomp) throw UnsupportedOperator("verify-stability needs a guiding decomposition");
  ctx.note("guiding run to t = " + fmt_short(cfg.guiding.t_end));
  const GuidingRun g = run_guiding(cfg, setup);
  const TwoScalePulse tp = assemble(g.pulse, *setup.decomp, cfg.coeffs.beta.sample(ctx.cell));
  ctx.note("perturbed two-scale run to t = " + fmt_short(cfg.solver.t_end));
  const StabilityReport r = stability_experiment(tp, *setup.decomp, cfg.coeffs, cfg.solver, cfg.stability);

  {
    CsvWriter out = ctx.csv(ctx.name("verify-stability", "none"), {"t", "D", "shift"});
    for (std::size_t i = 0; i < r.times.size(); ++i) out.row({r.times[i], r.distances[i], r.shifts[i]});
  }
  const double d0 = r.distances.front(), d1 = r.distances.back();
  ctx.check(info("pulse_speed", r.c));
  ctx.check(info("D_initial", d0));
  ctx.check(info("D_final", d1));
  if (r.delta > 0.0) {
    ctx.check(at_most("stability_decay_ratio", d1 / d0, 0.5));
    ctx.check(above("stability_kappa", r.kappa, 0.0));
    ctx.check(at_least("stability_fit_r2", r.r2, 0.9));
    ctx.check(info("stability_fit_t0", r.fit_t0));
    ctx.check(info("stability_fit_t1", r.fit_t1));
    ctx.check(info("stability_K3", r.K3_effective));
  } else {
    ctx.check(info("baseline_max_D", *std::max_element(r.distances.begin(), r.distances.end())));
  }
  ctx.check(info("stability_shift_z1", r.z1));
}

void check_lemmas(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::optional<EigenDecomposition> dec;
  try {
    dec = decompose(cfg.coeffs, ctx.cell);
  } catch (const UnsupportedOperator& e) {
    ctx.note(std::string("decomposition refused: ") + e.what());
  }
  const bool expect_refusal = cfg.preset == "ex3-contspec";
  if (expect_refusal) ctx.check(at_least("decomposition_refused", dec ? 0.0 : 1.0, 1.0));
  if (!dec && !expect_refusal) throw UnsupportedOperator("no guiding decomposition for these coefficients");

  if (dec) {
    const GuidingParams gp = guiding_params(*dec, cfg.coeffs);
    for (std::size_t i = 0; i < dec->modes.size(); ++i) {
      const auto& mode = dec->modes[i];
      auto Lphi = apply_L(cfg.coeffs, mode.shape);
      for (std::size_t k = 0; k < Lphi.size(); ++k) Lphi[k] -= mode.lambda * mode.shape[k];
      const std::string n = std::to_string(i + 1);
      ctx.check(at_most("eigen_residual_" + n, cell_norm(Lphi) / cell_norm(mode.shape), 1e-10));
      ctx.check(info("lambda_" + n, mode.lambda));
      ctx.check(info("alpha_" + n, gp.alpha[i]));
      ctx.check(info("beta_" + n, gp.beta[i]));
    }
    double guided = 0.0;
    for (const auto& mode : dec->guided_modes) {
      auto Lphi = apply_L(cfg.coeffs, mode.shape);
      for (std::size_t k = 0; k < Lphi.size(); ++k) Lphi[k] -= mode.lambda * mode.shape[k];
      guided = std::max(guided, cell_norm(Lphi));
    }
    ctx.check(info("guided_eigen_residual_max", guided));
    ctx.check(at_most("alpha_outside_guiding_modes", dec->alpha_residual, 1e-10));
    ctx.check(info("beta_plus_norm", gp.beta_plus_norm));
    ctx.check(info("spectral_gap_sigma_plus", dec->gap.sigma_plus));

    if (cfg.preset == "ex1-two-sines" && dec->modes.size() == 2) {
      const double pi2 = std::numbers::pi * std::numbers::pi;
      const double l1 = 0.0001 * (1.0 + 4.0 * pi2), l2 = 0.0001 * (1.0 + 16.0 * pi2);
      ctx.check(at_most("lambda_1_rel_error", std::abs(dec->modes[0].lambda - l1) / l1, 1e-14));
      ctx.check(at_most("lambda_2_rel_error", std::abs(dec->modes[1].lambda - l2) / l2, 1e-14));
      for (std::size_t i = 0; i < 2; ++i) {
        const std::string n = std::to_string(i + 1);
        ctx.check(at_most("alpha_" + n + "_error", std::abs(gp.alpha[i] - 1.0), 1e-10));
        ctx.check(at_most("beta_" + n + "_error", std::abs(gp.beta[i] - 0.001), 1e-10));
      }
    }
  }

  // dual-norm lemma on its own grid: the smallest eps needs several macro points per cell
  const MacroGrid lg(60.0, 16384);
  const TwoScaleField g = TwoScaleField::from_function(
      lg, ctx.cell, [](double x, double y) { return std::exp(-x * x / 100.0) * std::sin(2.0 * std::numbers::pi * y); });
  const auto ratios = check_dual_norm_lemma(g, {1.0, 0.5, 0.25});
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    ctx.check(at_most("dual_norm_ratio_eps" + eps_tag(ratios[i].epsilon), ratios[i].ratio, 1.05));
    if (i == 0) continue;
    const double scale = ratios[i].dual_norm / ratios[i - 1].dual_norm;
    ctx.check(at_least("dual_norm_halving_eps" + eps_tag(ratios[i].epsilon) + "_min", scale, 0.4));
    ctx.check(at_most("dual_norm_halving_eps" + eps_tag(ratios[i].epsilon) + "_max", scale, 0.6));
  }

  const GrowthBound gb = growth_bound(cfg.coeffs, 1.0);
  ctx.check(info("growth_C", gb.C));
  ctx.check(info("growth_kappa", gb.kappa));
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string compiler() {
#if defined(__clang__)
  return "clang " __clang_version__;
#elif defined(__GNUC__)
  return "gcc " __VERSION__;
#else
  return "unknown";
#endif
}

void write_summary(const std::filesystem::path& dir, const ExperimentResult& res) {
  std::ofstream out(dir / "summary.csv");
  if (!out) throw Error("cannot write summary.csv");
  out << "name,value,bound,status\n";
  for (const auto& c : res.checks)
    out << c.name << ',' << fmt17(c.value) << ',' << (c.relation == Check::Relation::Info ? "" : fmt17(c.bound)) << ','
        << c.status() << '\n';
}

void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& cfg, const ExperimentResult& res,
                    const std::string& started) {
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw Error("cannot write manifest.txt");
  out << "[config]\n";
  for (const auto& [k, v] : cfg.echo) out << k << " = " << v << '\n';
  out << "\n[versions]\n";
  out << "fft = " << fft_backend_version() << '\n';
  out << "boost = " << BOOST_LIB_VERSION << '\n';
  out << "compiler = " << compiler() << '\n';
  out << "\n[run]\n";
  out << "started = " << started << '\n';
  out << "wall_seconds = " << fmt_short(std::round(res.wall_seconds * 1000.0) / 1000.0) << '\n';
  out << "status = " << (res.passed() ? "pass" : "fail") << '\n';
  if (!res.error.empty()) out << "error = " << res.error << '\n';
  out << "\n[files]\n";
  out << "summary.csv\n";
  for (const auto& f : res.files) out << f << '\n';
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.solver.validate();
  cfg.coeffs.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = timestamp();
  const std::filesystem::path dir = opts.out ? *opts.out : cfg.output.dir;
  std::filesystem::create_directories(dir);

  ExperimentResult res;
  Context ctx{cfg, dir, opts.log, res, MacroGrid(cfg.grid.half_length, cfg.grid.n_x), CellGrid(cfg.grid.n_y)};
  ctx.note(std::string(kind_name(cfg.kind)) + " " + cfg.preset + " -> " + dir.string());
  try {
    switch (cfg.kind) {
      case ExperimentKind::SimulateEps: simulate_eps(ctx); break;
      case ExperimentKind::SimulateTwoScale: simulate_twoscale(ctx); break;
      case ExperimentKind::BuildPulse: build_pulse(ctx); break;
      case ExperimentKind::VerifyConvergence: verify_convergence(ctx); break;
      case ExperimentKind::VerifyStability: verify_stability(ctx); break;
      case ExperimentKind::CheckLemmas: check_lemmas(ctx); break;
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const ParseError&) {
    throw;
  } catch (const BlowUp& e) {
    res.error = std::string(e.what()) + " (t = " + fmt_short(e.time()) + ")";
  } catch (const Error& e) {
    res.error = e.what();
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_summary(dir, res);
  write_manifest(dir, cfg, res, started);
  ctx.note(res.passed() ? "all asserted checks pass" : "FAILED" + (res.error.empty() ? "" : ": " + res.error));
  return res;
}

}  // namespace tsfhn
