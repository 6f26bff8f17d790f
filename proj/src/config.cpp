#include "tsfhn/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tsfhn/errors.hpp"
#include "tsfhn/format.hpp"
#include "tsfhn/presets.hpp"

namespace tsfhn {

namespace {

constexpr std::pair<ExperimentKind, std::string_view> kKinds[] = {
    {ExperimentKind::SimulateEps, "simulate-eps"},
    {ExperimentKind::SimulateTwoScale, "simulate-twoscale"},
    {ExperimentKind::BuildPulse, "build-pulse"},
    {ExperimentKind::VerifyConvergence, "verify-convergence"},
    {ExperimentKind::VerifyStability, "verify-stability"},
    {ExperimentKind::CheckLemmas, "check-lemmas"},
};

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"experiment", {"kind", "preset", "epsilon", "initial"}},
      {"coefficients", {"alpha", "beta", "b", "d", "a"}},
      {"grid", {"half_length", "n_x", "n_y"}},
      {"solver", {"dt", "t_end", "observe_every", "blowup_ceiling"}},
      {"seed", {"center", "width", "height", "preload", "preload_width"}},
      {"guiding",
       {"t_end", "settle_tol", "settle_ahead", "settle_behind", "allow_unsettled", "alpha", "beta", "lambda"}},
      {"stability",
       {"delta", "translate", "bump_offset", "bump_width", "cell_mode", "search_halfwidth", "fit_start",
        "floor_factor"}},
      {"output", {"dir", "x_stride", "sample_every", "snapshots", "y_stride"}},
  };
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& field, const std::string& text) {
  double v = 0.0;
  const auto t = trim(text);
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size() || !std::isfinite(v))
    throw ValidationError(field, "'" + t + "' is not a number");
  return v;
}

std::size_t to_size(const std::string& field, const std::string& text) {
  std::size_t v = 0;
  const auto t = trim(text);
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw ValidationError(field, "'" + t + "' is not a non-negative integer");
  return v;
}

bool to_bool(const std::string& field, const std::string& text) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ValidationError(field, "'" + t + "' is not a boolean");
}

double positive(const std::string& field, double v) {
  if (!(v > 0.0)) throw ValidationError(field, "must be positive");
  return v;
}

std::string opt_short(const std::optional<double>& v) { return v ? fmt_short(*v) : std::string("none"); }

void build_echo(ExperimentConfig& c) {
  auto& e = c.echo;
  e.clear();
  e.emplace_back("experiment.kind", std::string(kind_name(c.kind)));
  e.emplace_back("experiment.preset", c.preset);
  std::string eps;
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) eps += (i ? "," : "") + fmt_short(c.epsilons[i]);
  e.emplace_back("experiment.epsilon", eps);
  e.emplace_back("experiment.initial", c.initial == InitialSource::Pulse ? "pulse" : "seed");
  e.emplace_back("experiment.paper_scale", c.paper_scale ? "true" : "false");
  e.emplace_back("coefficients.alpha", c.coeffs.alpha.describe());
  e.emplace_back("coefficients.beta", c.coeffs.beta.describe());
  e.emplace_back("coefficients.b", c.coeffs.b.describe());
  e.emplace_back("coefficients.d", c.coeffs.d.describe());
  e.emplace_back("coefficients.f", c.coeffs.f.describe());
  e.emplace_back("grid.half_length", fmt_short(c.grid.half_length));
  e.emplace_back("grid.n_x", std::to_string(c.grid.n_x));
  e.emplace_back("grid.n_y", std::to_string(c.grid.n_y));
  e.emplace_back("solver.dt", fmt_short(c.solver.dt));
  e.emplace_back("solver.t_end", fmt_short(c.solver.t_end));
  e.emplace_back("solver.observe_every", std::to_string(c.solver.observe_every));
  e.emplace_back("solver.blowup_ceiling", fmt_short(c.solver.blowup_ceiling));
  e.emplace_back("seed.center", fmt_short(c.seed.center));
  e.emplace_back("seed.width", fmt_short(c.seed.width));
  e.emplace_back("seed.height", fmt_short(c.seed.height));
  e.emplace_back("seed.preload", fmt_short(c.seed.preload));
  e.emplace_back("seed.preload_width", fmt_short(c.seed.preload_width));
  e.emplace_back("guiding.t_end", fmt_short(c.guiding.t_end));
  e.emplace_back("guiding.settle_tol", fmt_short(c.guiding.settle_tol));
  e.emplace_back("guiding.settle_ahead", opt_short(c.guiding.settle_ahead));
  e.emplace_back("guiding.settle_behind", opt_short(c.guiding.settle_behind));
  e.emplace_back("guiding.allow_unsettled", c.guiding.allow_unsettled ? "true" : "false");
  e.emplace_back("guiding.alpha", opt_short(c.guiding.alpha));
  e.emplace_back("guiding.beta", opt_short(c.guiding.beta));
  e.emplace_back("guiding.lambda", opt_short(c.guiding.lambda));
  e.emplace_back("stability.delta", fmt_short(c.stability.delta));
  e.emplace_back("stability.translate", fmt_short(c.stability.translate));
  e.emplace_back("stability.bump_offset", fmt_short(c.stability.bump_offset));
  e.emplace_back("stability.bump_width", fmt_short(c.stability.bump_width));
  e.emplace_back("stability.cell_mode", c.stability.cell_mode ? std::to_string(*c.stability.cell_mode) : "none");
  e.emplace_back("stability.search_halfwidth", fmt_short(c.stability.search_halfwidth));
  e.emplace_back("stability.fit_start", fmt_short(c.stability.fit_start));
  e.emplace_back("stability.floor_factor", fmt_short(c.stability.floor_factor));
  e.emplace_back("output.dir", c.output.dir.string());
  e.emplace_back("output.x_stride", std::to_string(c.output.x_stride));
  e.emplace_back("output.y_stride", std::to_string(c.output.y_stride));
  e.emplace_back("output.sample_every", std::to_string(c.output.sample_every));
  e.emplace_back("output.snapshots", std::to_string(c.output.snapshots));
}

double default_t_end(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::VerifyConvergence: return 100.0;
    case ExperimentKind::VerifyStability: return 200.0;
    default: return 300.0;
  }
}

}  // namespace

std::string_view kind_name(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "unknown";
}

ExperimentKind parse_kind(std::string_view s) {
  for (const auto& [kind, name] : kKinds)
    if (name == s) return kind;
  throw ValidationError("experiment.kind", "unknown kind '" + std::string(s) + "'");
}

std::vector<double> parse_epsilon_list(std::string_view text) {
  std::vector<double> out;
  std::stringstream ss{std::string(unquote(std::string(text)))};
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(positive("experiment.epsilon", to_double("experiment.epsilon", item)));
  if (out.empty()) throw ValidationError("experiment.epsilon", "empty list");
  return out;
}

ExperimentConfig preset_defaults(std::string_view preset, bool paper_scale) {
  ExperimentConfig c;
  c.preset = std::string(preset);
  c.paper_scale = paper_scale;
  c.coeffs = preset == "custom" ? preset_coefficients("ex1-two-sines") : preset_coefficients(preset);
  c.grid = paper_scale ? GridConfig{300.0, 16384, 512} : GridConfig{150.0, 4096, 128};
  c.epsilons = {16.0, 8.0, 4.0, 2.0};
  c.guiding.t_end = 3000.0;
  if (preset == "ex2-step") {
    // n_y a multiple of 10 so the break at 0.7 is a node and the sampled mean of alpha is 0.4.
    c.grid.n_y = paper_scale ? 480 : 160;
    c.epsilons = {25.0, 5.0};
    // lambda = 1e-5: the wake never recovers on a bounded window, so no settled pulse exists.
    c.guiding.t_end = 300.0;
    c.guiding.allow_unsettled = true;
  } else if (preset == "ex3-contspec") {
    c.grid = GridConfig{700.0, 32768, 64};
    c.epsilons = {30.0, 3.0};
    c.guiding.alpha = 1.0;
    c.guiding.beta = 0.003;
    c.guiding.lambda = 0.005;
    c.guiding.t_end = 600.0;
    c.guiding.allow_unsettled = true;
  }
  c.seed = SeedSpec{0.6 * c.grid.half_length, 20.0, 1.0, 0.15, 20.0};
  c.solver.t_end = default_t_end(c.kind);
  return c;
}

ExperimentConfig parse_config(std::string_view text, bool paper_scale) {
  boost::property_tree::ptree tree;
  {
    std::istringstream in{std::string(text)};
    try {
      boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ParseError(e.message(), static_cast<int>(e.line()));
    }
  }
  std::map<std::string, std::string> kv;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw ValidationError(section, "key outside of any section");
    const auto it = schema().find(section);
    if (it == schema().end()) throw ValidationError(section, "unknown section");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ValidationError(section + "." + key, "unknown key");
      kv[section + "." + key] = unquote(value.data());
    }
  }
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  const auto kind = get("experiment.kind");
  if (!kind) throw ValidationError("experiment.kind", "missing");
  const auto preset = get("experiment.preset");
  if (!preset) throw ValidationError("experiment.preset", "missing (use a preset name or 'custom')");
  ExperimentConfig c = preset_defaults(*preset, paper_scale);
  c.kind = parse_kind(*kind);
  c.solver.t_end = default_t_end(c.kind);

  if (auto v = get("experiment.epsilon")) c.epsilons = parse_epsilon_list(*v);
  if (auto v = get("experiment.initial")) {
    if (*v == "pulse") c.initial = InitialSource::Pulse;
    else if (*v == "seed") c.initial = InitialSource::Seed;
    else throw ValidationError("experiment.initial", "expected 'pulse' or 'seed'");
  }

  const bool custom = *preset == "custom";
  for (const char* k : {"alpha", "beta", "b", "d"}) {
    const auto v = get(std::string("coefficients.") + k);
    if (!v) {
      if (custom) throw ValidationError(std::string("coefficients.") + k, "required for a custom preset");
      continue;
    }
    std::optional<CellFunction> parsed;
    try {
      parsed = CellFunction::parse(*v);
    } catch (const Error& e) {
      throw ValidationError(std::string("coefficients.") + k, e.what());
    }
    const CellFunction& f = *parsed;
    if (std::string_view(k) == "alpha") c.coeffs.alpha = f;
    else if (std::string_view(k) == "beta") c.coeffs.beta = f;
    else if (std::string_view(k) == "b") c.coeffs.b = f;
    else c.coeffs.d = f;
  }
  if (auto v = get("coefficients.a")) c.coeffs.f = CubicNonlinearity(to_double("coefficients.a", *v));
  if (custom) c.coeffs.name = "custom";
  try {
    c.coeffs.validate();
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError("coefficients", e.what());
  }

  if (auto v = get("grid.half_length")) {
    c.grid.half_length = positive("grid.half_length", to_double("grid.half_length", *v));
    if (!get("seed.center")) c.seed.center = 0.6 * c.grid.half_length;
  }
  if (auto v = get("grid.n_x")) c.grid.n_x = to_size("grid.n_x", *v);
  if (auto v = get("grid.n_y")) c.grid.n_y = to_size("grid.n_y", *v);
  if (c.grid.n_x < 8 || c.grid.n_x % 2) throw ValidationError("grid.n_x", "must be even and >= 8");
  if (c.grid.n_y < 4) throw ValidationError("grid.n_y", "must be >= 4");

  if (auto v = get("solver.dt")) c.solver.dt = to_double("solver.dt", *v);
  if (auto v = get("solver.t_end")) c.solver.t_end = to_double("solver.t_end", *v);
  if (auto v = get("solver.observe_every")) c.solver.observe_every = to_size("solver.observe_every", *v);
  if (auto v = get("solver.blowup_ceiling")) c.solver.blowup_ceiling = to_double("solver.blowup_ceiling", *v);
  c.solver.validate();

  if (auto v = get("seed.center")) c.seed.center = to_double("seed.center", *v);
  if (auto v = get("seed.width")) c.seed.width = positive("seed.width", to_double("seed.width", *v));
  if (auto v = get("seed.height")) c.seed.height = to_double("seed.height", *v);
  if (auto v = get("seed.preload")) c.seed.preload = to_double("seed.preload", *v);
  if (auto v = get("seed.preload_width"))
    c.seed.preload_width = positive("seed.preload_width", to_double("seed.preload_width", *v));

  if (auto v = get("guiding.t_end")) c.guiding.t_end = positive("guiding.t_end", to_double("guiding.t_end", *v));
  if (auto v = get("guiding.settle_tol"))
    c.guiding.settle_tol = positive("guiding.settle_tol", to_double("guiding.settle_tol", *v));
  if (auto v = get("guiding.settle_ahead")) c.guiding.settle_ahead = to_double("guiding.settle_ahead", *v);
  if (auto v = get("guiding.settle_behind")) c.guiding.settle_behind = to_double("guiding.settle_behind", *v);
  if (auto v = get("guiding.allow_unsettled")) c.guiding.allow_unsettled = to_bool("guiding.allow_unsettled", *v);
  if (auto v = get("guiding.alpha")) c.guiding.alpha = to_double("guiding.alpha", *v);
  if (auto v = get("guiding.beta")) c.guiding.beta = to_double("guiding.beta", *v);
  if (auto v = get("guiding.lambda")) c.guiding.lambda = positive("guiding.lambda", to_double("guiding.lambda", *v));
  const int overrides = c.guiding.alpha.has_value() + c.guiding.beta.has_value() + c.guiding.lambda.has_value();
  if (overrides != 0 && overrides != 3) throw ValidationError("guiding", "alpha, beta and lambda must be given together");

  if (auto v = get("stability.delta")) c.stability.delta = to_double("stability.delta", *v);
  if (!(c.stability.delta >= 0.0)) throw ValidationError("stability.delta", "must be >= 0");
  if (auto v = get("stability.translate")) c.stability.translate = to_double("stability.translate", *v);
  if (auto v = get("stability.bump_offset")) c.stability.bump_offset = to_double("stability.bump_offset", *v);
  if (auto v = get("stability.bump_width"))
    c.stability.bump_width = positive("stability.bump_width", to_double("stability.bump_width", *v));
  if (auto v = get("stability.cell_mode")) c.stability.cell_mode = to_size("stability.cell_mode", *v);
  if (auto v = get("stability.search_halfwidth"))
    c.stability.search_halfwidth = positive("stability.search_halfwidth", to_double("stability.search_halfwidth", *v));
  if (auto v = get("stability.fit_start")) c.stability.fit_start = to_double("stability.fit_start", *v);
  if (auto v = get("stability.floor_factor"))
    c.stability.floor_factor = positive("stability.floor_factor", to_double("stability.floor_factor", *v));

  if (auto v = get("output.dir")) c.output.dir = *v;
  if (auto v = get("output.x_stride")) c.output.x_stride = to_size("output.x_stride", *v);
  if (auto v = get("output.y_stride")) c.output.y_stride = to_size("output.y_stride", *v);
  if (auto v = get("output.sample_every")) c.output.sample_every = to_size("output.sample_every", *v);
  if (auto v = get("output.snapshots")) c.output.snapshots = to_size("output.snapshots", *v);
  if (c.output.x_stride == 0) throw ValidationError("output.x_stride", "must be >= 1");
  if (c.output.y_stride == 0) throw ValidationError("output.y_stride", "must be >= 1");
  if (c.output.sample_every == 0) throw ValidationError("output.sample_every", "must be >= 1");

  const bool needs_eps = c.kind == ExperimentKind::SimulateEps || c.kind == ExperimentKind::VerifyConvergence;
  if (needs_eps && c.epsilons.empty()) throw ValidationError("experiment.epsilon", "required for this kind");
  if (c.kind == ExperimentKind::VerifyConvergence && c.epsilons.size() < 3)
    throw ValidationError("experiment.epsilon", "verify-convergence needs at least 3 values");

  build_echo(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, bool paper_scale) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), paper_scale);
}

}  // namespace tsfhn
