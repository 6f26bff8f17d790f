#include "tsfhn/field.hpp"

#include <cmath>
#include <string>

#include "tsfhn/errors.hpp"

namespace tsfhn {

MacroGrid::MacroGrid(double half_length, std::size_t n) : half_length_(half_length), n_(n) {
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw InvalidArgument("MacroGrid: half_length must be positive and finite");
  if (n < 8 || n % 2 != 0) throw InvalidArgument("MacroGrid: n_x must be even and >= 8");
}

CellGrid::CellGrid(std::size_t n) : n_(n) {
  if (n < 8 || n % 2 != 0) throw InvalidArgument("CellGrid: n_y must be even and >= 8");
}

Field1D::Field1D(const MacroGrid& grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field1D::Field1D(const MacroGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw InvalidArgument("Field1D: value count " + std::to_string(values_.size()) +
                          " does not match grid size " + std::to_string(grid_.size()));
}

bool Field1D::all_finite() const noexcept {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

Field1D& Field1D::operator+=(const Field1D& other) {
  require_same_grid(grid_, other.grid_, "Field1D::operator+=");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
  return *this;
}

Field1D& Field1D::operator-=(const Field1D& other) {
  require_same_grid(grid_, other.grid_, "Field1D::operator-=");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
  return *this;
}

Field1D& Field1D::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

Field1D operator+(Field1D a, const Field1D& b) { return a += b; }
Field1D operator-(Field1D a, const Field1D& b) { return a -= b; }
Field1D operator*(double s, Field1D a) { return a *= s; }

TwoScaleField::TwoScaleField(const MacroGrid& macro, const CellGrid& cell)
    : macro_(macro), cell_(cell), values_(macro.size() * cell.size(), 0.0) {}

TwoScaleField::TwoScaleField(const MacroGrid& macro, const CellGrid& cell,
                             std::vector<double> values)
    : macro_(macro), cell_(cell), values_(std::move(values)) {
  if (values_.size() != macro_.size() * cell_.size())
    throw InvalidArgument("TwoScaleField: value count does not match n_x * n_y");
}

bool TwoScaleField::all_finite() const noexcept {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

Field1D TwoScaleField::cell_average() const {
  Field1D out(macro_);
  const double dy = cell_.dy();
  for (std::size_t j = 0; j < macro_.size(); ++j) {
    double s = 0.0;
    for (double v : row(j)) s += v;
    out[j] = s * dy;
  }
  return out;
}

Field1D TwoScaleField::cell_average(std::span<const double> weight) const {
  if (weight.size() != cell_.size()) throw GridMismatch("cell_average: weight length != n_y");
  Field1D out(macro_);
  const double dy = cell_.dy();
  for (std::size_t j = 0; j < macro_.size(); ++j) {
    auto r = row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += weight[k] * r[k];
    out[j] = s * dy;
  }
  return out;
}

Field1D TwoScaleField::cell_l2_norm() const {
  Field1D out(macro_);
  for (std::size_t j = 0; j < macro_.size(); ++j) out[j] = cell_norm(row(j));
  return out;
}

TwoScaleField& TwoScaleField::operator-=(const TwoScaleField& other) {
  require_same_grid(macro_, other.macro_, "TwoScaleField::operator-=");
  if (!(cell_ == other.cell_)) throw GridMismatch("TwoScaleField::operator-=: cell grids differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

void require_same_grid(const MacroGrid& a, const MacroGrid& b, const char* context) {
  if (!(a == b)) throw GridMismatch(std::string(context) + ": macro grids differ");
}

double cell_inner(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw GridMismatch("cell_inner: length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s / static_cast<double>(a.size());
}

double cell_norm(std::span<const double> a) { return std::sqrt(cell_inner(a, a)); }

double l2_norm(const TwoScaleField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s * f.macro().dx() * f.cell().dy());
}

}  // namespace tsfhn
