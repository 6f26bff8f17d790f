#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tsfhn/config.hpp"
#include "tsfhn/guiding.hpp"
#include "tsfhn/microcell.hpp"
#include "tsfhn/twoscale_pulse.hpp"

namespace tsfhn {

/// One line of summary.csv. Informational rows carry no bound and never fail.
struct Check {
  enum class Relation { AtMost, AtLeast, Above, Info };

  std::string name;
  double value = 0.0;
  Relation relation = Relation::Info;
  double bound = 0.0;
  bool asserted = false;

  bool pass() const;
  std::string status() const;  // "pass", "fail" or "info"
};

Check at_most(std::string name, double value, double bound, bool asserted = true);
Check at_least(std::string name, double value, double bound, bool asserted = true);
Check above(std::string name, double value, double bound, bool asserted = true);
Check info(std::string name, double value);

struct ExperimentResult {
  std::vector<Check> checks;
  std::vector<std::string> files;  // relative to the output directory
  double wall_seconds = 0.0;
  std::string error;  // set when a module error aborted the run

  bool passed() const;
};

struct RunOptions {
  std::optional<std::filesystem::path> out;  // overrides output.dir
  std::ostream* log = nullptr;                // progress notes; null is quiet
};

/// Guiding parameters for the configured coefficients: from the cell
/// decomposition when it exists, otherwise from the single-mode override.
/// Throws UnsupportedOperator when neither is available.
struct GuidingSetup {
  std::optional<EigenDecomposition> decomp;
  GuidingParams params;
};
GuidingSetup guiding_setup(const ExperimentConfig& cfg, const CellGrid& cell);

struct GuidingRun {
  GuidingPulse pulse;
  std::vector<TrackPoint> track;
  std::vector<GuidingState> samples;  // evenly spaced states, the last at t_end
};

/// Runs the guiding system from the configured seed and extracts the pulse.
GuidingRun run_guiding(const ExperimentConfig& cfg, const GuidingSetup& setup, std::size_t snapshots = 0);

/// V(x, y) = sum_i v_i(x) alpha~_i(y) / alpha_i for guiding components v_i;
/// with the single-mode override the shape is alpha itself.
TwoScaleField lift_guiding(const std::vector<Field1D>& v, const GuidingSetup& setup, const CoefficientSet& coeffs,
                           const CellGrid& cell);

/// Runs the configured experiment and writes manifest.txt, summary.csv and
/// the module CSVs. Module errors end the run early and are reported in the
/// result (summary and manifest are still written); ValidationError and
/// ParseError propagate.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace tsfhn
