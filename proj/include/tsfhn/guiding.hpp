#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "tsfhn/field.hpp"
#include "tsfhn/fit.hpp"
#include "tsfhn/microcell.hpp"
#include "tsfhn/spectral.hpp"

namespace tsfhn {

struct GuidingState {
  double t = 0.0;
  Field1D u;
  std::vector<Field1D> v;

  bool all_finite() const noexcept;
  double sup_norm() const noexcept;
};

inline constexpr double kDefaultBlowupCeiling = 10.0;

/// One semi-implicit step: reaction by explicit Euler at the old iterate,
/// u-diffusion exact in Fourier space. Reuses scratch buffers across steps.
class GuidingStepper {
 public:
  GuidingStepper(const MacroGrid& grid, GuidingParams params, CubicNonlinearity f, double dt,
                 double blowup_ceiling = kDefaultBlowupCeiling);

  void step(GuidingState& s);
  double dt() const noexcept { return dt_; }
  const GuidingParams& params() const noexcept { return params_; }

 private:
  MacroGrid grid_;
  GuidingParams params_;
  CubicNonlinearity f_;
  double dt_;
  double ceiling_;
  std::vector<double> denom_;
  std::vector<double> rhs_;
  std::vector<Complex> spec_;
};

GuidingState step_guiding(const GuidingState& s, const GuidingParams& params, const CubicNonlinearity& f,
                          double dt, double blowup_ceiling = kDefaultBlowupCeiling);

struct SeedSpec {
  double center = 0.0;
  double width = 20.0;
  double height = 1.0;
  /// v_1 = preload * exp(-((x-center)/preload_width)^2) for x > center. A
  /// preload on the right suppresses the right-moving half of the ignition.
  double preload = 0.0;
  double preload_width = 40.0;
};

GuidingState seed_bump(const MacroGrid& grid, std::size_t m, const SeedSpec& seed);

struct TrackPoint {
  double t;
  double position;  // sub-grid location of max u
  double max_u;
};

/// Location of max u with ties to the smallest index, refined by a parabola
/// through the neighbours.
double peak_position(const Field1D& u);
std::size_t peak_index(const Field1D& u);

/// Observation record: the peak track of every sample plus the most recent
/// full states.
class GuidingHistory {
 public:
  explicit GuidingHistory(double dt_obs, std::size_t keep_states = 2);

  void observe(const GuidingState& s);
  double dt_obs() const noexcept { return dt_obs_; }
  const std::vector<TrackPoint>& track() const noexcept { return track_; }
  const std::deque<GuidingState>& recent() const noexcept { return recent_; }

 private:
  double dt_obs_;
  std::size_t keep_;
  std::vector<TrackPoint> track_;
  std::deque<GuidingState> recent_;
};

struct ExtractOptions {
  double settle_tol = 1e-5;
  double pulse_floor = 0.1;
  double tail_lo = 1e-6;
  double tail_hi = 1e-3;
  std::size_t min_tail_samples = 10;
  /// Settle residual only over z in [-ahead, behind] around the peak; empty
  /// means the whole window.
  std::optional<double> settle_ahead;
  std::optional<double> settle_behind;
  /// Skip NotSettled and return the pulse anyway (residual still reported).
  bool allow_unsettled = false;
};

struct GuidingPulse {
  double c = 0.0;
  Field1D u;  // on the co-moving window, peak at index n/2 (z = 0)
  std::vector<Field1D> v;
  std::optional<double> sigma;
  TwoSidedTail tails;
  double settle_residual = 0.0;
  double boundary_u = 0.0;  // max |u| over the two window-edge samples
};

GuidingPulse extract_pulse(const GuidingHistory& history, const ExtractOptions& opts = {});

/// Wave speed from the last half of a track: positive for leftward motion
/// (co-moving coordinate z = x + c t). Positions are unwrapped modulo `period`.
double fit_speed(const std::vector<TrackPoint>& track, double period);

/// g[j] = f[j - shift] with periodic wrap.
Field1D roll(const Field1D& f, std::ptrdiff_t shift);

}  // namespace tsfhn
