// Command-line front end: one experiment per invocation.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "tsfhn/config.hpp"
#include "tsfhn/errors.hpp"
#include "tsfhn/experiment.hpp"
#include "tsfhn/format.hpp"

int main(int argc, char** argv) {
  CLI::App app{"FitzHugh-Nagumo two-scale homogenization experiments"};
  std::string config_path, out_dir;
  bool paper_scale = false, quiet = false;
  app.add_option("--config", config_path, "INI experiment description")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "artifact directory (overrides output.dir)");
  app.add_flag("--paper-scale", paper_scale, "use the paper's domain and resolution as defaults");
  app.add_flag("--quiet", quiet, "no progress notes");
  CLI11_PARSE(app, argc, argv);

  try {
    const tsfhn::ExperimentConfig cfg = tsfhn::load_config(config_path, paper_scale);
    tsfhn::RunOptions opts;
    if (!out_dir.empty()) opts.out = out_dir;
    if (!quiet) opts.log = &std::cerr;
    const tsfhn::ExperimentResult res = tsfhn::run_experiment(cfg, opts);

    for (const auto& c : res.checks) {
      std::cout << c.name << "  " << tsfhn::fmt_short(c.value);
      if (c.relation != tsfhn::Check::Relation::Info) std::cout << "  bound " << tsfhn::fmt_short(c.bound);
      std::cout << "  " << c.status() << '\n';
    }
    if (!res.error.empty()) std::cerr << "error: " << res.error << '\n';
    return res.passed() ? 0 : 1;
  } catch (const tsfhn::ParseError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return 2;
  } catch (const tsfhn::ValidationError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
