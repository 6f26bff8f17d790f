#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsfhn/cell_function.hpp"
#include "tsfhn/field.hpp"

namespace tsfhn {

/// f(u) = scale * u (1 - u)(u - a)
class CubicNonlinearity {
 public:
  CubicNonlinearity() : CubicNonlinearity(0.15) {}
  explicit CubicNonlinearity(double a, double scale = 1.0);

  double a() const noexcept { return a_; }
  double scale() const noexcept { return scale_; }
  double operator()(double u) const noexcept { return scale_ * u * (1.0 - u) * (u - a_); }

  /// Constants with f(u) >= c1 u - c2 for u <= 0 and f(u) <= c3 u + c4 for u >= 0.
  struct Growth {
    double c1, c2, c3, c4;
  };
  Growth growth() const noexcept;

  std::string describe() const;

 private:
  double a_;
  double scale_;
};

struct CoefficientSet {
  std::string name = "custom";
  CellFunction alpha;
  CellFunction beta;
  CellFunction b;
  CellFunction d;
  CubicNonlinearity f;
  bool positive_spectrum = true;

  /// d must be identically zero or a smooth function bounded below by a
  /// positive constant; throws ValidationError otherwise.
  void validate() const;
};

struct SampledCoefficients {
  std::vector<double> alpha, beta, b, d;
};

SampledCoefficients sample_coefficients(const CoefficientSet& coeffs, const CellGrid& cell);

/// (L phi)(y) = -(d phi_y)_y + b phi with Fourier-collocation derivatives.
std::vector<double> apply_L(const CoefficientSet& coeffs, std::span<const double> phi);

struct CellMode {
  std::vector<double> shape;  // guiding: the component of alpha; guided: unit-norm basis function
  double lambda = 0.0;
  double norm = 0.0;
  std::string label;
};

struct SpectralGap {
  double sigma_minus = 0.0;  // no negative spectrum is ever retained
  double sigma_plus = 0.0;   // lower bound of the spectrum on the guided complement
};

struct EigenDecomposition {
  enum class Family { ConstantDiffusion, ZeroDiffusion };

  CellGrid cell{8};
  Family family = Family::ConstantDiffusion;
  std::vector<CellMode> modes;
  std::vector<CellMode> guided_modes;
  SpectralGap gap;
  /// ||alpha - sum of guiding modes|| / ||alpha||
  double alpha_residual = 0.0;
};

inline constexpr double kDefaultModeTol = 1e-8;
inline constexpr std::size_t kDefaultGuidedModes = 16;

/// Throws UnsupportedOperator unless d, b are constant with b > 0 and either
/// d > 0 or d == 0.
EigenDecomposition decompose(const CoefficientSet& coeffs, const CellGrid& cell,
                             std::size_t truncation = kDefaultGuidedModes,
                             double mode_tol = kDefaultModeTol);

struct GuidingParams {
  std::size_t m = 0;
  std::vector<double> alpha, beta, lambda;
  /// Part of lambda_i stepped explicitly; the rest is implicit. Matches the
  /// two-scale solver (b explicit, d k^2 implicit). Empty means all explicit.
  std::vector<double> lambda_explicit;
  /// ||beta - sum_i P_i beta||, the guided part of beta.
  double beta_plus_norm = 0.0;
  /// What is left after also removing the retained guided modes.
  double beta_residual_norm = 0.0;

  void validate() const;
};

GuidingParams guiding_params(const EigenDecomposition& decomp, const CoefficientSet& coeffs);

struct Projection {
  std::vector<double> guiding;  // c_i = (phi, alpha~_i) / alpha_i
  std::vector<double> guided;   // (phi, psi_k)
  double residual = 0.0;
};

Projection project(const EigenDecomposition& decomp, std::span<const double> phi);
std::vector<double> reconstruct(const EigenDecomposition& decomp, const Projection& p);

}  // namespace tsfhn
