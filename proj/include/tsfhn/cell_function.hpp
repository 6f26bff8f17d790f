#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsfhn/field.hpp"

namespace tsfhn {

struct TrigTerm {
  bool is_sin = true;
  int n = 1;  // frequency: sin(2*pi*n*y) or cos(2*pi*n*y)
  double amp = 0.0;
};

/// Periodic function on the unit cell given by a closed formula. Three shapes:
/// constant, finite trigonometric sum, and right-continuous step function.
class CellFunction {
 public:
  enum class Kind { Constant, Trig, Steps };

  CellFunction() = default;

  static CellFunction constant(double value);
  static CellFunction trig(double offset, std::vector<TrigTerm> terms);
  /// breaks = {(y_0, v_0), (y_1, v_1), ...} with y_0 = 0 < y_1 < ... < 1;
  /// the value on [y_i, y_{i+1}) is v_i.
  static CellFunction steps(std::vector<std::pair<double, double>> breaks);

  /// "const v" | "trig c0 [sin|cos n amp]..." | "steps y0 v0 y1 v1 ..."
  static CellFunction parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  double operator()(double y) const;
  std::vector<double> sample(const CellGrid& cell) const;

  bool is_constant() const noexcept;
  /// Value when is_constant(); throws otherwise.
  double constant_value() const;
  bool is_zero() const noexcept { return is_constant() && constant_value() == 0.0; }
  double sup_abs() const;
  CellFunction scaled(double s) const;

  std::string describe() const;

  double offset() const noexcept { return offset_; }
  const std::vector<TrigTerm>& terms() const noexcept { return terms_; }
  const std::vector<std::pair<double, double>>& breaks() const noexcept { return breaks_; }

 private:
  Kind kind_ = Kind::Constant;
  double offset_ = 0.0;
  std::vector<TrigTerm> terms_;
  std::vector<std::pair<double, double>> breaks_;
};

}  // namespace tsfhn
