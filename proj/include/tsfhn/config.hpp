#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsfhn/guiding.hpp"
#include "tsfhn/microcell.hpp"
#include "tsfhn/simulators.hpp"
#include "tsfhn/verify.hpp"

namespace tsfhn {

enum class ExperimentKind { SimulateEps, SimulateTwoScale, BuildPulse, VerifyConvergence, VerifyStability, CheckLemmas };

std::string_view kind_name(ExperimentKind k);
ExperimentKind parse_kind(std::string_view s);

struct GridConfig {
  double half_length = 150.0;
  std::size_t n_x = 4096;
  std::size_t n_y = 128;
};

/// The guiding run that produces pulses and pulse-shaped initial data.
struct GuidingConfig {
  double t_end = 3000.0;
  double settle_tol = 1e-5;
  std::optional<double> settle_ahead;
  std::optional<double> settle_behind;
  bool allow_unsettled = false;
  /// Single-mode override (alpha_1, beta_1, lambda_1) for operators without
  /// a guiding decomposition.
  std::optional<double> alpha, beta, lambda;
};

enum class InitialSource { Pulse, Seed };

struct OutputConfig {
  std::filesystem::path dir = "out";
  /// Write every x_stride-th macro node.
  std::size_t x_stride = 4;
  /// Write every sample_every-th observation of a trajectory.
  std::size_t sample_every = 10;
  /// Number of V(x, y) snapshots of a two-scale run (evenly spaced, incl. t_end).
  std::size_t snapshots = 2;
  std::size_t y_stride = 4;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SimulateEps;
  std::string preset;
  CoefficientSet coeffs;
  bool paper_scale = false;
  GridConfig grid;
  SolverConfig solver;
  std::vector<double> epsilons;
  SeedSpec seed;
  InitialSource initial = InitialSource::Pulse;
  GuidingConfig guiding;
  StabilityOptions stability;
  OutputConfig output;
  /// Every resolved setting as section.key = value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> echo;
};

/// Desk- or paper-scale defaults for a preset; the config file overrides them.
ExperimentConfig preset_defaults(std::string_view preset, bool paper_scale);

/// "16,8,4,2" -> {16, 8, 4, 2}. Whitespace around entries is ignored.
std::vector<double> parse_epsilon_list(std::string_view text);

/// INI text with [section] headers and key = value lines; ';' and '#' start
/// comments. Unknown sections or keys are rejected.
ExperimentConfig parse_config(std::string_view text, bool paper_scale = false);
ExperimentConfig load_config(const std::filesystem::path& path, bool paper_scale = false);

}  // namespace tsfhn
