#include "tsfhn/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "tsfhn/errors.hpp"

namespace tsfhn {
namespace {

// The FFTW planner is not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw InvalidArgument("RealFft: length must be >= 2");
  std::lock_guard lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* spec = fftw_alloc_complex(n / 2 + 1);
  spec_ = spec;
  const int ni = static_cast<int>(n);
  plan_fwd_ = fftw_plan_dft_r2c_1d(ni, real_, spec, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(ni, spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() { release(); }

RealFft::RealFft(RealFft&& other) noexcept { *this = std::move(other); }

RealFft& RealFft::operator=(RealFft&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    real_ = std::exchange(other.real_, nullptr);
    spec_ = std::exchange(other.spec_, nullptr);
    plan_fwd_ = std::exchange(other.plan_fwd_, nullptr);
    plan_inv_ = std::exchange(other.plan_inv_, nullptr);
  }
  return *this;
}

void RealFft::release() noexcept {
  if (!real_) return;
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_);
  fftw_free(spec_);
  real_ = nullptr;
  spec_ = nullptr;
}

void RealFft::forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() != n_ || out.size() != spectrum_size())
    throw InvalidArgument("RealFft::forward: buffer size mismatch");
  std::memcpy(real_, in.data(), n_ * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  std::memcpy(static_cast<void*>(out.data()), spec_, spectrum_size() * sizeof(Complex));
}

void RealFft::inverse(std::span<const Complex> in, std::span<double> out) {
  if (out.size() != n_ || in.size() != spectrum_size())
    throw InvalidArgument("RealFft::inverse: buffer size mismatch");
  std::memcpy(spec_, in.data(), spectrum_size() * sizeof(Complex));
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = real_[j] * scale;
}

BatchedRealFft::BatchedRealFft(std::size_t rows, std::size_t n) : rows_(rows), n_(n) {
  if (n < 2 || rows == 0) throw InvalidArgument("BatchedRealFft: bad shape");
  std::lock_guard lock(planner_mutex());
  const std::size_t ns = n / 2 + 1;
  real_ = fftw_alloc_real(rows * n);
  auto* spec = fftw_alloc_complex(rows * ns);
  spec_ = spec;
  int len = static_cast<int>(n);
  const int howmany = static_cast<int>(rows);
  plan_fwd_ = fftw_plan_many_dft_r2c(1, &len, howmany, real_, nullptr, 1, len, spec, nullptr, 1,
                                     static_cast<int>(ns), FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_many_dft_c2r(1, &len, howmany, spec, nullptr, 1, static_cast<int>(ns),
                                     real_, nullptr, 1, len, FFTW_ESTIMATE);
}

BatchedRealFft::~BatchedRealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_);
  fftw_free(spec_);
}

void BatchedRealFft::forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() != rows_ * n_ || out.size() != rows_ * spectrum_size())
    throw InvalidArgument("BatchedRealFft::forward: buffer size mismatch");
  std::memcpy(real_, in.data(), in.size() * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  std::memcpy(static_cast<void*>(out.data()), spec_, out.size() * sizeof(Complex));
}

void BatchedRealFft::inverse(std::span<const Complex> in, std::span<double> out) {
  if (out.size() != rows_ * n_ || in.size() != rows_ * spectrum_size())
    throw InvalidArgument("BatchedRealFft::inverse: buffer size mismatch");
  std::memcpy(spec_, in.data(), in.size() * sizeof(Complex));
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = real_[i] * scale;
}

std::vector<double> wavenumbers(std::size_t n, double length) {
  std::vector<double> k(n / 2 + 1);
  const double base = 2.0 * std::numbers::pi / length;
  for (std::size_t m = 0; m < k.size(); ++m) k[m] = base * static_cast<double>(m);
  return k;
}

std::vector<double> wavenumbers(const MacroGrid& grid) {
  return wavenumbers(grid.size(), grid.length());
}

namespace detail {

RealFft& cached_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

std::vector<Complex> spectrum(const Field1D& f) {
  auto& fft = cached_fft(f.size());
  std::vector<Complex> out(fft.spectrum_size());
  fft.forward(f.values(), out);
  return out;
}

}  // namespace detail

double l2_norm(const Field1D& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s * f.grid().dx());
}

double linf_norm(const Field1D& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double h1_dual_norm(const Field1D& f) {
  return std::sqrt(fourier_weighted_energy(f, [](double k) { return 1.0 / (1.0 + k * k); }));
}

NormReport norms(const Field1D& f, bool with_dual) {
  NormReport r;
  r.l2 = l2_norm(f);
  r.linf = linf_norm(f);
  if (with_dual) r.h1_dual = h1_dual_norm(f);
  return r;
}

std::vector<double> periodic_derivative(std::span<const double> f, double length, int order) {
  const std::size_t n = f.size();
  auto& fft = detail::cached_fft(n);
  std::vector<Complex> spec(fft.spectrum_size());
  fft.forward(f, spec);
  const auto k = wavenumbers(n, length);
  for (std::size_t m = 0; m < spec.size(); ++m) {
    // The Nyquist mode has no odd-derivative partner in a real signal.
    if (2 * m == n && order % 2 == 1) {
      spec[m] = 0.0;
      continue;
    }
    Complex factor = 1.0;
    for (int o = 0; o < order; ++o) factor *= Complex(0.0, k[m]);
    spec[m] *= factor;
  }
  std::vector<double> out(n);
  fft.inverse(spec, out);
  return out;
}

Field1D spectral_derivative(const Field1D& f) {
  return Field1D(f.grid(), periodic_derivative(f.values(), f.grid().length(), 1));
}

Field1D spectral_second_derivative(const Field1D& f) {
  return Field1D(f.grid(), periodic_derivative(f.values(), f.grid().length(), 2));
}

Field1D implicit_diffusion_solve(const Field1D& rhs, double dt, double diffusivity) {
  if (!(dt * diffusivity >= 0.0))
    throw InvalidArgument("implicit_diffusion_solve: dt*diffusivity must be >= 0");
  if (diffusivity == 0.0) return rhs;
  auto& fft = detail::cached_fft(rhs.size());
  std::vector<Complex> spec(fft.spectrum_size());
  fft.forward(rhs.values(), spec);
  const auto k = wavenumbers(rhs.grid());
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] /= 1.0 + dt * diffusivity * k[m] * k[m];
  Field1D out(rhs.grid());
  fft.inverse(spec, out.values());
  return out;
}

Field1D fourier_shift(const Field1D& f, double s) {
  auto spec = detail::spectrum(f);
  const auto k = wavenumbers(f.grid());
  const std::size_t n = f.size();
  for (std::size_t m = 0; m < spec.size(); ++m) {
    if (2 * m == n) {
      // Keep the shifted signal real: the Nyquist cosine picks up cos(k s).
      spec[m] *= std::cos(k[m] * s);
      continue;
    }
    spec[m] *= std::polar(1.0, k[m] * s);
  }
  Field1D out(f.grid());
  detail::cached_fft(n).inverse(spec, out.values());
  return out;
}

std::string fft_backend_version() { return fftw_version; }

}  // namespace tsfhn
