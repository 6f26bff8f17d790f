#include "tsfhn/fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tsfhn/errors.hpp"

namespace tsfhn {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("linear_fit: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw DegenerateFit("linear_fit: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DegenerateFit("linear_fit: all abscissae equal");
  LinearFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

std::optional<TailFit> fit_tail(std::span<const double> values, double h, double lo, double hi,
                                std::size_t min_samples) {
  const std::size_t n = values.size();
  std::vector<double> env(n);
  double run = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    run = std::max(run, std::abs(values[j]));
    env[j] = run;
  }
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < n; ++j) {
    if (env[j] >= lo && env[j] <= hi) {
      xs.push_back(static_cast<double>(j) * h);
      ys.push_back(std::log(env[j]));
    }
  }
  if (xs.size() < std::max<std::size_t>(min_samples, 2)) return std::nullopt;
  const auto lf = linear_fit(xs, ys);
  return TailFit{-lf.slope, lf.r2, xs.size()};
}

std::optional<double> TwoSidedTail::rate() const {
  if (ahead && behind) return std::min(ahead->rate, behind->rate);
  if (ahead) return ahead->rate;
  if (behind) return behind->rate;
  return std::nullopt;
}

TwoSidedTail fit_two_sided(std::span<const double> values, std::size_t peak, double h, double lo,
                           double hi, std::size_t min_samples) {
  const std::size_t n = values.size();
  const std::size_t half = n / 2;
  std::vector<double> ahead(half), behind(half);
  for (std::size_t j = 0; j < half; ++j) {
    ahead[j] = values[(peak + n - j) % n];
    behind[j] = values[(peak + j) % n];
  }
  return {fit_tail(ahead, h, lo, hi, min_samples), fit_tail(behind, h, lo, hi, min_samples)};
}

}  // namespace tsfhn
