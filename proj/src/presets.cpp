#include "tsfhn/presets.hpp"

#include <cmath>

#include "tsfhn/errors.hpp"

namespace tsfhn {

std::vector<std::string> preset_names() { return {"ex1-two-sines", "ex2-step", "ex3-contspec"}; }

CoefficientSet preset_coefficients(std::string_view name) {
  const double r2 = std::sqrt(2.0);
  CoefficientSet c;
  c.name = std::string(name);
  c.f = CubicNonlinearity(0.15);
  if (name == "ex1-two-sines") {
    const double delta = 0.0001;
    const double s = 0.001;
    c.alpha = CellFunction::trig(0.0, {{true, 1, r2}, {true, 2, r2}});
    // beta = 0.001 (alpha + sqrt2 sin(8 pi y)); the last term is orthogonal to alpha.
    c.beta = CellFunction::trig(0.0, {{true, 1, s * r2}, {true, 2, s * r2}, {true, 4, s * r2}});
    c.b = CellFunction::constant(delta);
    c.d = CellFunction::constant(delta);
  } else if (name == "ex2-step") {
    c.alpha = CellFunction::steps({{0.0, 1.0}, {0.7, -1.0}});
    c.beta = CellFunction::steps({{0.0, 0.003}, {0.7, -0.003}});
    c.b = CellFunction::constant(0.00001);
    c.d = CellFunction::constant(0.0);
  } else if (name == "ex3-contspec") {
    c.alpha = CellFunction::constant(1.0);
    c.beta = CellFunction::constant(0.003);
    c.b = CellFunction::trig(0.005, {{true, 1, 0.003}});
    c.d = CellFunction::constant(0.0);
  } else {
    throw ValidationError("preset", "unknown preset '" + std::string(name) + "'");
  }
  c.validate();
  return c;
}

}  // namespace tsfhn
