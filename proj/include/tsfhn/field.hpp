#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tsfhn {

/// Uniform periodic grid on [-L, L) with n points, x_j = -L + j*dx.
class MacroGrid {
 public:
  MacroGrid(double half_length, std::size_t n);

  double half_length() const noexcept { return half_length_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return 2.0 * half_length_ / static_cast<double>(n_); }
  double length() const noexcept { return 2.0 * half_length_; }
  double x(std::size_t j) const noexcept { return -half_length_ + static_cast<double>(j) * dx(); }

  friend bool operator==(const MacroGrid&, const MacroGrid&) = default;

 private:
  double half_length_;
  std::size_t n_;
};

/// Uniform grid on the periodicity cell [0, 1), y_j = j/n.
class CellGrid {
 public:
  explicit CellGrid(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double dy() const noexcept { return 1.0 / static_cast<double>(n_); }
  // j/n rather than j*dy so that step breakpoints like 0.7 are hit exactly.
  double y(std::size_t j) const noexcept { return static_cast<double>(j) / static_cast<double>(n_); }

  friend bool operator==(const CellGrid&, const CellGrid&) = default;

 private:
  std::size_t n_;
};

class Field1D {
 public:
  explicit Field1D(const MacroGrid& grid);
  Field1D(const MacroGrid& grid, std::vector<double> values);

  template <class F>
  static Field1D from_function(const MacroGrid& grid, F&& f) {
    Field1D out(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) out.values_[j] = f(grid.x(j));
    return out;
  }

  const MacroGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t j) const noexcept { return values_[j]; }
  double& operator[](std::size_t j) noexcept { return values_[j]; }

  bool all_finite() const noexcept;

  Field1D& operator+=(const Field1D& other);
  Field1D& operator-=(const Field1D& other);
  Field1D& operator*=(double s) noexcept;

 private:
  MacroGrid grid_;
  std::vector<double> values_;
};

Field1D operator+(Field1D a, const Field1D& b);
Field1D operator-(Field1D a, const Field1D& b);
Field1D operator*(double s, Field1D a);

/// Function of (x, y) on MacroGrid x CellGrid, stored row-major (row = macro point).
class TwoScaleField {
 public:
  TwoScaleField(const MacroGrid& macro, const CellGrid& cell);
  TwoScaleField(const MacroGrid& macro, const CellGrid& cell, std::vector<double> values);

  template <class F>
  static TwoScaleField from_function(const MacroGrid& macro, const CellGrid& cell, F&& f) {
    TwoScaleField out(macro, cell);
    for (std::size_t j = 0; j < macro.size(); ++j)
      for (std::size_t k = 0; k < cell.size(); ++k) out(j, k) = f(macro.x(j), cell.y(k));
    return out;
  }

  const MacroGrid& macro() const noexcept { return macro_; }
  const CellGrid& cell() const noexcept { return cell_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> row(std::size_t j) const noexcept {
    return std::span<const double>(values_).subspan(j * cell_.size(), cell_.size());
  }
  std::span<double> row(std::size_t j) noexcept {
    return std::span<double>(values_).subspan(j * cell_.size(), cell_.size());
  }
  double operator()(std::size_t j, std::size_t k) const noexcept {
    return values_[j * cell_.size() + k];
  }
  double& operator()(std::size_t j, std::size_t k) noexcept { return values_[j * cell_.size() + k]; }

  bool all_finite() const noexcept;

  /// Cell quadrature of each row: x_j -> sum_k w(y_k) V(x_j, y_k) dy.
  Field1D cell_average() const;
  Field1D cell_average(std::span<const double> weight) const;
  /// x_j -> ||V(x_j, .)||_{L2(S)}
  Field1D cell_l2_norm() const;

  TwoScaleField& operator-=(const TwoScaleField& other);

 private:
  MacroGrid macro_;
  CellGrid cell_;
  std::vector<double> values_;
};

struct NormReport {
  double l2 = 0.0;
  double linf = 0.0;
  std::optional<double> h1_dual;
};

void require_same_grid(const MacroGrid& a, const MacroGrid& b, const char* context);

// Quadrature on the cell (rectangle rule).
double cell_inner(std::span<const double> a, std::span<const double> b);
double cell_norm(std::span<const double> a);

/// L2(R x S) norm of a two-scale field.
double l2_norm(const TwoScaleField& f);

}  // namespace tsfhn
