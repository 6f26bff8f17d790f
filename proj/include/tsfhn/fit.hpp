#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace tsfhn {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = slope*x + intercept. Needs >= 2 distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Exponential decay rate of one tail. `values` runs outward from the core
/// (index 0 nearest the peak) at spacing h. The envelope max_{j'>=j} |v_j'| is
/// fitted log-linearly over the samples with lo <= envelope <= hi.
struct TailFit {
  double rate = 0.0;
  double r2 = 0.0;
  std::size_t samples = 0;
};

std::optional<TailFit> fit_tail(std::span<const double> values, double h, double lo, double hi,
                                std::size_t min_samples = 10);

/// Both tails of a periodic profile around index `peak`: "ahead" walks to
/// lower indices, "behind" to higher, each for half the window.
struct TwoSidedTail {
  std::optional<TailFit> ahead;
  std::optional<TailFit> behind;
  /// min of the available rates; empty when neither side has enough samples
  std::optional<double> rate() const;
};

TwoSidedTail fit_two_sided(std::span<const double> values, std::size_t peak, double h, double lo,
                           double hi, std::size_t min_samples = 10);

}  // namespace tsfhn
