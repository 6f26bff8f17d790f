#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "tsfhn/errors.hpp"
#include "tsfhn/field.hpp"
#include "tsfhn/microcell.hpp"
#include "tsfhn/spectral.hpp"

namespace tsfhn {

struct SolverConfig {
  double dt = 0.01;
  double t_end = 0.0;
  std::size_t observe_every = 100;
  double blowup_ceiling = 10.0;

  void validate() const;
  std::size_t steps() const;
};

struct EpsState {
  double t = 0.0;
  double epsilon = 1.0;
  Field1D u;
  Field1D v;

  double sup_norm() const noexcept { return std::max(linf_norm(u), linf_norm(v)); }
};

struct TwoScaleState {
  double t = 0.0;
  Field1D U;
  TwoScaleField V;

  double sup_norm() const noexcept;
};

/// Semi-implicit stepper for the epsilon-system. Oscillating coefficients are
/// evaluated once from their formulas at x_j / epsilon.
class EpsSolver {
 public:
  EpsSolver(const MacroGrid& grid, const CoefficientSet& coeffs, double epsilon, const SolverConfig& cfg);

  void step(EpsState& s);
  double epsilon() const noexcept { return eps_; }
  const std::vector<double>& alpha_eps() const noexcept { return alpha_; }

 private:
  MacroGrid grid_;
  CoefficientSet coeffs_;
  double eps_;
  SolverConfig cfg_;
  std::vector<double> alpha_, beta_, b_;
  std::vector<double> d_half_;  // eps^2 d at x_{j+1/2}, only when d is not constant
  double v_diffusivity_ = 0.0;  // eps^2 d when d is constant
  std::vector<double> u_denom_, v_denom_;
  std::vector<double> ru_, rv_;
  std::vector<Complex> spec_;
};

/// Semi-implicit stepper for the two-scale system. With constant d the
/// y-diffusion is solved exactly per macro point in the y-Fourier basis; with
/// d == 0 the V-update is a pointwise ODE step.
class TwoScaleSolver {
 public:
  TwoScaleSolver(const MacroGrid& grid, const CellGrid& cell, const CoefficientSet& coeffs,
                 const SolverConfig& cfg);
  ~TwoScaleSolver();
  TwoScaleSolver(TwoScaleSolver&&) noexcept;

  void step(TwoScaleState& s);

 private:
  MacroGrid grid_;
  CellGrid cell_;
  CoefficientSet coeffs_;
  SolverConfig cfg_;
  std::vector<double> alpha_, beta_, b_, d_;
  enum class YMode { None, Implicit, Explicit } ymode_;
  double d_const_ = 0.0;
  std::vector<double> u_denom_, y_denom_;
  std::vector<double> ru_;
  std::vector<Complex> spec_;
  std::unique_ptr<BatchedRealFft> yfft_;
  std::vector<Complex> yspec_;
};

/// Iterates `stepper` for cfg.steps() steps and hands the state to `observer`
/// at t = 0 and after every observe_every steps. Blow-ups propagate with their
/// time attached.
template <class State, class Stepper>
void run(State& state, Stepper& stepper, const SolverConfig& cfg, const std::function<void(const State&)>& observer) {
  cfg.validate();
  if (observer) observer(state);
  const std::size_t steps = cfg.steps();
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(state);
    if (k % cfg.observe_every == 0 && observer) observer(state);
  }
}

}  // namespace tsfhn
