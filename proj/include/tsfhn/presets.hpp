#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tsfhn/microcell.hpp"

namespace tsfhn {

/// "ex1-two-sines", "ex2-step", "ex3-contspec". Throws ValidationError for
/// anything else.
CoefficientSet preset_coefficients(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace tsfhn
