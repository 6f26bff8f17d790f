#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsfhn/field.hpp"

namespace tsfhn {

using Complex = std::complex<double>;

/// Real-to-complex FFT of fixed length backed by FFTW. Plans are created with
/// FFTW_ESTIMATE so results are reproducible run to run. Not copyable; one
/// instance must not be used from two threads at once.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& other) noexcept;
  RealFft& operator=(RealFft&& other) noexcept;

  std::size_t size() const noexcept { return n_; }
  std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }

  /// out_k = sum_j in_j exp(-2 pi i j k / n), k = 0..n/2
  void forward(std::span<const double> in, std::span<Complex> out);
  /// Inverse of forward, including the 1/n normalisation.
  void inverse(std::span<const Complex> in, std::span<double> out);

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  double* real_ = nullptr;
  void* spec_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

/// `rows` independent real FFTs of length n over a row-major array.
class BatchedRealFft {
 public:
  BatchedRealFft(std::size_t rows, std::size_t n);
  ~BatchedRealFft();
  BatchedRealFft(const BatchedRealFft&) = delete;
  BatchedRealFft& operator=(const BatchedRealFft&) = delete;

  std::size_t rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return n_; }
  std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<Complex> out);
  void inverse(std::span<const Complex> in, std::span<double> out);

 private:
  std::size_t rows_;
  std::size_t n_;
  double* real_ = nullptr;
  void* spec_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

/// Version string of the FFT library, for run manifests.
std::string fft_backend_version();

/// Physical wavenumbers 2*pi*k/length for the n/2+1 real-FFT bins.
std::vector<double> wavenumbers(std::size_t n, double length);
std::vector<double> wavenumbers(const MacroGrid& grid);

double l2_norm(const Field1D& f);
double linf_norm(const Field1D& f);
double h1_dual_norm(const Field1D& f);
NormReport norms(const Field1D& f, bool with_dual = false);

/// sum_k w(k_phys) |f_k|^2 with coefficients scaled so that w == 1 reproduces
/// l2_norm(f)^2 (Parseval).
template <class W>
double fourier_weighted_energy(const Field1D& f, W&& weight);

Field1D spectral_derivative(const Field1D& f);
Field1D spectral_second_derivative(const Field1D& f);

/// Solves (I - dt*D*d_xx) w = rhs mode by mode.
Field1D implicit_diffusion_solve(const Field1D& rhs, double dt, double diffusivity);

/// g(x) = f(x + s) by exact phase rotation of the trigonometric interpolant.
Field1D fourier_shift(const Field1D& f, double s);

/// Spectral derivative of a periodic sequence with period `length`.
std::vector<double> periodic_derivative(std::span<const double> f, double length, int order = 1);

namespace detail {
RealFft& cached_fft(std::size_t n);
std::vector<Complex> spectrum(const Field1D& f);
}  // namespace detail

template <class W>
double fourier_weighted_energy(const Field1D& f, W&& weight) {
  const auto spec = detail::spectrum(f);
  const auto k = wavenumbers(f.grid());
  const std::size_t n = f.size();
  double s = 0.0;
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const double mult = (m == 0 || 2 * m == n) ? 1.0 : 2.0;
    s += mult * std::norm(spec[m]) * weight(k[m]);
  }
  const double nd = static_cast<double>(n);
  return s * f.grid().length() / (nd * nd);
}

}  // namespace tsfhn
