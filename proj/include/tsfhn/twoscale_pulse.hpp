#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tsfhn/field.hpp"
#include "tsfhn/fit.hpp"
#include "tsfhn/guiding.hpp"
#include "tsfhn/microcell.hpp"

namespace tsfhn {

/// v(z) = (1/c) int_{-inf}^z exp(-(lambda/c)(z - xi)) beta u(xi) dxi on the
/// periodic window. u is taken piecewise linear between nodes and the
/// exponential weight is integrated exactly; the wrap-around is closed in
/// closed form, so the result is the exact periodic steady state of the filter.
Field1D convolve_mode(const Field1D& u, double beta, double lambda, double c);

/// The c = 0 limit: v = beta u / lambda.
Field1D stationary_mode(const Field1D& u, double beta, double lambda);

struct TwoScalePulse {
  double c = 0.0;
  Field1D u;
  TwoScaleField v;
  std::vector<Field1D> guiding;  // v_i
  std::vector<Field1D> guided;   // coefficients g_k of the retained guided modes
  std::vector<double> guided_beta;
  std::optional<double> gamma;
  std::vector<double> component_norms;  // max |v_i| then max |g_k|
};

/// Coefficients with |(beta, psi_k)| below this are not filtered.
inline constexpr double kGuidedBetaFloor = 1e-12;

TwoScalePulse assemble(const GuidingPulse& pulse, const EigenDecomposition& decomp,
                       std::span<const double> beta_on_cell);

struct DecayReport {
  TwoSidedTail v_norm;   // ||v(z,.)||
  TwoSidedTail vz_norm;  // ||v_z(z,.)||
  TwoSidedTail u;
  double gamma = 0.0;
  double gamma_z = 0.0;
  double sigma_u = 0.0;
};

/// Log-linear tail fits over [1e-6, 1e-3] x peak. Throws TailTooShort when
/// any of the three quantities has fewer than `min_samples` samples in the
/// band on both sides.
DecayReport decay_report(const TwoScalePulse& pulse, std::size_t min_samples = 10);

struct ComovingResidual {
  Field1D u_residual;    // c u' - u'' - f(u) + int alpha v dy
  TwoScaleField v_residual;  // c v_z + L v - beta u
  double u_l2 = 0.0;
  double v_l2 = 0.0;
};

ComovingResidual comoving_residual(const TwoScalePulse& pulse, const CoefficientSet& coeffs);

}  // namespace tsfhn
