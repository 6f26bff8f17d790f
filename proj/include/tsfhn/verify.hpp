#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tsfhn/field.hpp"
#include "tsfhn/microcell.hpp"
#include "tsfhn/simulators.hpp"
#include "tsfhn/twoscale_pulse.hpp"

namespace tsfhn {

/// (R_eps V)(x_j) = V(x_j, x_j/eps), linear in y between cell nodes.
Field1D reconstruct(const TwoScaleField& V, double epsilon);

/// (T_eps v)(x, y) = v(eps*floor(x/eps) + eps*y), linear in x with periodic wrap.
TwoScaleField unfold(const Field1D& v, double epsilon, const CellGrid& cell);

struct ErrorSeries {
  double epsilon = 0.0;
  std::vector<double> times;
  std::vector<double> u_err_l2;
  std::vector<double> v_err_l2;
  std::vector<double> u_err_linf;
  std::vector<double> v_err_linf;
  /// sqrt(sum over samples up to t of dt_obs * ||u^eps_x - U_x||^2)
  std::vector<double> grad_err;

  std::size_t size() const noexcept { return times.size(); }
  /// max over t of (u_err_l2 + v_err_l2)
  double max_combined() const;
};

/// Streams samples so trajectories never need to be held in memory. The
/// reference is (U, R_eps V) at the same time as the eps-state.
class ErrorAccumulator {
 public:
  explicit ErrorAccumulator(double epsilon);

  void add(double t, const Field1D& u_eps, const Field1D& v_eps, const Field1D& U, const Field1D& RV);
  const ErrorSeries& series() const noexcept { return s_; }

 private:
  ErrorSeries s_;
  double grad_sq_ = 0.0;
};

ErrorSeries error_series(const std::vector<EpsState>& eps_traj, const std::vector<TwoScaleState>& twoscale_traj,
                         double epsilon);

struct RateFit {
  std::vector<double> epsilons;
  std::vector<double> max_errors;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// errors strictly decrease with epsilon
  bool monotone = false;
};

/// Least squares of log(error) against log(epsilon). Epsilons are sorted
/// decreasing first. DegenerateFit on fewer than 3 points, non-positive
/// errors, or an error that grows by more than 50% as epsilon shrinks.
RateFit fit_rate(std::vector<double> epsilons, std::vector<double> max_errors);
RateFit fit_rate(const std::vector<ErrorSeries>& series);

struct DualNormRatio {
  double epsilon = 0.0;
  double dual_norm = 0.0;  // ||R_eps g - gbar||_{H^1*}
  double bound = 0.0;      // eps ||g||_{H^1; L^2}
  double ratio = 0.0;
};

/// ||g||_{H^1(R; L^2(S))} with the x-derivative taken spectrally per y column.
double h1_l2_norm(const TwoScaleField& g);

std::vector<DualNormRatio> check_dual_norm_lemma(const TwoScaleField& g, const std::vector<double>& epsilons);

struct GrowthBound {
  double C = 1.0;
  double kappa = 0.0;

  double at(double t) const;
};

/// C = max(1, initial sup-norm), kappa = max(2 c_i, sup|alpha|, sup|beta|, sup|b|).
GrowthBound growth_bound(const CoefficientSet& coeffs, double initial_sup);

struct StabilityOptions {
  double delta = 0.01;
  /// Start from the pulse translated by this amount, u(x + translate).
  double translate = 0.0;
  /// Gaussian bump added to U: delta * exp(-((x - x0) / width)^2), x0 relative to the pulse peak.
  double bump_offset = 5.0;
  double bump_width = 3.0;
  /// Optional amplitude of delta * (unit cell mode) added to V on the same bump.
  std::optional<std::size_t> cell_mode;
  /// Half width of the coarse shift scan around the previous optimum.
  double search_halfwidth = 5.0;
  /// Samples before this time are excluded from the kappa fit.
  double fit_start = 0.0;
  /// The fit window ends where D first falls below floor_factor * min D.
  double floor_factor = 4.0;
};

struct StabilityReport {
  double delta = 0.0;
  double c = 0.0;
  std::vector<double> times;
  std::vector<double> distances;
  std::vector<double> shifts;  // optimal s at every sample
  double z1 = 0.0;
  double kappa = 0.0;
  double r2 = 0.0;
  double fit_t0 = 0.0;
  double fit_t1 = 0.0;
  double K3_effective = 0.0;
};

/// Evolves pulse + delta * perturbation with the two-scale solver and tracks
/// D(t) = min_s [ linf(U - u(. + ct + s)) + max_x ||V - v(x + ct + s, .)|| ].
/// The V-distance uses the mode expansion of the pulse, so any component of V
/// outside the pulse's modes is still counted. Throws NotDecaying when
/// delta > 0 and D(t_end) > D(0).
StabilityReport stability_experiment(const TwoScalePulse& pulse, const EigenDecomposition& decomp,
                                     const CoefficientSet& coeffs, const SolverConfig& cfg,
                                     const StabilityOptions& opts = {});

}  // namespace tsfhn
