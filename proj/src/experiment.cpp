#include <ggfp/experiment.hpp>

#include <ggfp/csv.hpp>
#include <ggfp/errors.hpp>
#include <ggfp/functionals.hpp>
#include <ggfp/scaling.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace ggfp {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::pair<Command, const char*> kCommands[] = {
    {Command::Steady, "steady"},
    {Command::Solve, "solve"},
    {Command::VerifyPoincare, "verify-poincare"},
    {Command::VerifyLogSobolev, "verify-logsobolev"},
    {Command::VerifyDecay, "verify-decay"},
    {Command::VerifyScaling, "verify-scaling"},
    {Command::Classify, "classify"},
};

bool needs_initial(Command c) {
  return c == Command::Solve || c == Command::VerifyDecay || c == Command::VerifyScaling;
}

bool needs_lsi_hypothesis(Command c) { return c == Command::VerifyLogSobolev || c == Command::VerifyDecay; }

int line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Maps (section, key) back to a source line by locating the quoted names.
class Locator {
 public:
  Locator(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  int line_of(const std::string& section, const std::string& key = {}) const {
    std::size_t pos = 0;
    if (!section.empty()) {
      const auto p = text_.find('"' + section + '"');
      if (p == std::string::npos) return 1;
      pos = p;
    }
    if (!key.empty()) {
      const auto q = text_.find('"' + key + '"', pos);
      if (q != std::string::npos) pos = q;
    }
    return line_at(text_, pos);
  }

  [[noreturn]] void fail(int line, const std::string& message) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + message, line);
  }
  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& message) const {
    fail(line_of(section, key), message);
  }

 private:
  const std::string& text_;
  std::string source_;
};

std::string where(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed,
                const Locator& loc) {
  if (!obj.is_object()) loc.fail(section, "", "section '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      loc.fail(section, key, "unknown key '" + where(section, key) + "'");
  }
}

double number(const json& obj, const std::string& section, const std::string& key, double fallback,
              const Locator& loc) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) loc.fail(section, key, "'" + where(section, key) + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) loc.fail(section, key, "'" + where(section, key) + "' must be finite");
  return d;
}

double positive(const json& obj, const std::string& section, const std::string& key, double fallback,
                const Locator& loc) {
  const double d = number(obj, section, key, fallback, loc);
  if (!(d > 0.0)) loc.fail(section, key, "'" + where(section, key) + "' must be positive");
  return d;
}

std::uint64_t integer(const json& obj, const std::string& section, const std::string& key, std::uint64_t fallback,
                      const Locator& loc) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    loc.fail(section, key, "'" + where(section, key) + "' must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

GenGammaParams parse_params(const json& obj, const std::string& section, const Locator& loc) {
  check_keys(obj, section, {"theta", "kappa", "delta", "lognormal"}, loc);
  if (obj.contains("lognormal")) {
    if (!obj.at("lognormal").is_boolean()) loc.fail(section, "lognormal", "'" + section + ".lognormal' must be a boolean");
    if (obj.at("lognormal").get<bool>()) {
      for (const char* k : {"theta", "kappa", "delta"})
        if (obj.contains(k)) loc.fail(section, k, "'" + where(section, k) + "' is not used in the log-normal limit");
      return GenGammaParams::lognormal();
    }
  }
  for (const char* k : {"kappa", "delta"})
    if (!obj.contains(k)) loc.fail(section, "", "missing '" + where(section, k) + "'");
  GenGammaParams p;
  p.theta = positive(obj, section, "theta", 1.0, loc);
  p.kappa = positive(obj, section, "kappa", 0.0, loc);
  p.delta = positive(obj, section, "delta", 0.0, loc);
  try {
    if (section == "params") p.validate();
    else p.validate_formula();
  } catch (const std::exception& e) {
    loc.fail(section, "delta", e.what());
  }
  return p;
}

GridSpec merged_default_grid(const GenGammaParams& p, const std::optional<GenGammaParams>& initial, std::size_t cells,
                             int quad_order) {
  GridSpec spec = default_grid_spec(p, cells, quad_order);
  if (initial) {
    const GridSpec other = default_grid_spec(*initial, cells, quad_order);
    spec.x_min = std::min(spec.x_min, other.x_min);
    spec.x_max = std::max(spec.x_max, other.x_max);
    if (other.spacing == Spacing::Geometric) spec.spacing = Spacing::Geometric;
  }
  return spec;
}

json params_json(const GenGammaParams& p) {
  json j;
  if (p.lognormal_limit) {
    j["lognormal"] = true;
  } else {
    j["theta"] = p.theta;
    j["kappa"] = p.kappa;
    j["delta"] = p.delta;
  }
  return j;
}

json config_json(const ExperimentConfig& c) {
  json j;
  if (c.initial) j["initial"] = params_json(*c.initial);
  j["grid"] = {{"x_min", c.grid.x_min},
               {"x_max", c.grid.x_max},
               {"cells", c.grid.cells},
               {"spacing", to_string(c.grid.spacing)},
               {"quad_order", c.grid.quad_order}};
  j["solver"] = {{"dt", c.solver.dt},
                 {"t_end", c.solver.t_end},
                 {"scheme", to_string(c.solver.scheme)},
                 {"linear_tolerance", c.solver.linear_tolerance},
                 {"cadence", c.solver.cadence},
                 {"snapshot_every", c.solver.snapshot_every}};
  json sharp = json::array();
  for (const auto& [a, b] : c.sharpness) sharp.push_back(json::array({a, b}));
  j["suite"] = {{"count", c.suite_count}, {"seed", c.suite_seed}, {"sharpness", sharp}};
  j["scaling"] = {{"m", c.scaling_m}, {"t", c.scaling_t}};
  j["decay"] = {{"window", json::array({c.decay.window_lo, c.decay.window_hi})},
                {"slack", c.decay.slack},
                {"identity_tolerance", c.decay.identity_tolerance},
                {"ck_tolerance", c.decay.ck_tolerance}};
  return j;
}

json tolerances_json(const Tolerances& t) {
  return {{"steady_residual", t.steady_residual},
          {"mass", t.mass},
          {"scaling", t.scaling},
          {"sharpness", t.sharpness}};
}

json check_json(const Check& c) {
  return {{"name", c.name},  {"lhs", c.lhs},   {"rhs", c.rhs}, {"margin", c.margin}, {"budget", c.budget},
          {"verdict", to_string(c.verdict)}, {"pass", c.pass}};
}

// Projects the initial law onto the run grid; more than 1e-6 of lost mass is a
// config problem (the grid does not cover the initial density).
DensityField initial_field(const ExperimentConfig& c, const GridPtr& grid) {
  const auto proj = project(*c.initial, grid);
  if (!(std::fabs(proj.tail_mass) <= 1e-6)) {
    std::ostringstream os;
    os << "initial density loses " << proj.tail_mass << " of its mass outside [" << c.grid.x_min << ", "
       << c.grid.x_max << "]";
    throw ConfigError(os.str(), 0);
  }
  return proj.field.normalized(1.0);
}

void write_snapshots(const Trajectory& traj, const fs::path& out) {
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
    write_field_csv(traj.snapshots[i], (out / ("snapshot_" + std::to_string(i) + ".csv")).string());
}

std::vector<Check> trajectory_checks(const Trajectory& traj, const Tolerances& tol) {
  std::vector<Check> checks;
  checks.push_back(make_check("mass conservation per step", traj.max_step_mass_change, tol.mass));
  checks.push_back(make_check("positivity", 0.0, traj.min_cell_value));
  double increase = 0.0;
  const auto& r = traj.records;
  for (std::size_t k = 1; k < r.size(); ++k) increase = std::max(increase, r[k].entropy - r[k - 1].entropy);
  const double h0 = r.empty() ? 0.0 : r.front().entropy;
  checks.push_back(make_check("entropy nonincreasing", increase, 0.0, 1e-14 * std::max(1.0, h0)));
  return checks;
}

void write_suite_csv(const std::vector<InequalityReport>& reports, const fs::path& path) {
  csv::Writer out(path.string());
  out.header({"label", "lhs", "rhs", "ratio", "margin", "pass"});
  for (const auto& r : reports) {
    out.cell(r.label).cell(r.lhs).cell(r.rhs).cell(r.ratio).cell(r.margin).cell(r.pass ? "true" : "false");
    out.end_row();
  }
}

struct Outcome {
  json results = json::object();
  std::vector<Check> checks;
};

Outcome run_steady(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
  Outcome o;
  const auto grid = c.grid.build();
  const FokkerPlanckOperator op(grid, c.params, c.solver.scheme);
  write_field_csv(op.equilibrium(), (out / "equilibrium.csv").string());
  const double residual = stationary_flux_residual(c.params, grid, c.solver.scheme);
  o.results["stationary_flux_residual"] = residual;
  o.results["equilibrium_tail_mass"] = op.equilibrium_tail_mass();
  o.results["boundary_regime"] = to_string(classify_boundary(c.params));
  o.checks.push_back(make_check("stationary flux residual", residual, c.tolerances.steady_residual));
  log << "stationary_flux_residual = " << csv::format(residual) << "\n";
  return o;
}

Outcome run_solve(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
  Outcome o;
  const auto grid = c.grid.build();
  const auto f0 = initial_field(c, grid);
  const Trajectory traj = solve(f0, c.params, c.solver);
  write_trajectory_csv(traj, (out / "trajectory.csv").string());
  write_snapshots(traj, out);
  o.results["steps"] = traj.steps;
  o.results["records"] = traj.records.size();
  o.results["H_initial"] = traj.records.front().entropy;
  o.results["H_final"] = traj.records.back().entropy;
  o.results["max_step_mass_change"] = traj.max_step_mass_change;
  o.results["min_cell_value"] = traj.min_cell_value;
  o.checks = trajectory_checks(traj, c.tolerances);
  log << "steps " << traj.steps << ", H(0) = " << csv::format(traj.records.front().entropy)
      << ", H(t_end) = " << csv::format(traj.records.back().entropy) << "\n";
  return o;
}

Outcome run_decay(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
  Outcome o;
  const auto grid = c.grid.build();
  const auto f0 = initial_field(c, grid);
  const Trajectory traj = solve(f0, c.params, c.solver);
  write_trajectory_csv(traj, (out / "trajectory.csv").string());
  write_snapshots(traj, out);
  const DecayAnalysis a = analyze_decay(traj, c.decay);

  {
    const double h0 = traj.records.front().entropy;
    const double cc = chernoff_constant(c.params);
    csv::Writer w((out / "decay.csv").string());
    w.header({"t", "H", "decay_bound", "lsi_rhs", "lsi_margin", "L1", "ck_bound"});
    for (const auto& r : traj.records) {
      const double bound = h0 * std::exp(-a.rate * r.t) * (1.0 + c.decay.slack);
      w.cell(r.t).cell(r.entropy).cell(bound).cell(cc * r.fisher).cell(cc * r.fisher - r.entropy);
      w.cell(r.l1).cell(2.0 * std::sqrt(std::max(0.0, r.entropy)));
      w.end_row();
    }
  }

  o.checks = trajectory_checks(traj, c.tolerances);
  o.checks.push_back(make_check("entropy production identity", a.identity_max_rel_error, c.decay.identity_tolerance));
  o.checks.push_back(make_check("exponential decay bound", a.bound_max_ratio, 1.0 + c.decay.slack));
  o.checks.push_back(make_check("csiszar-kullback", a.ck_max_excess, c.decay.ck_tolerance));
  o.checks.push_back(make_check(a.lsi_worst, "density-level log-sobolev (worst record)"));
  o.results["rate"] = a.rate;
  o.results["steps"] = traj.steps;
  o.results["records"] = traj.records.size();
  o.results["identity_points"] = a.identity_points;
  o.results["H_initial"] = traj.records.front().entropy;
  o.results["H_final"] = traj.records.back().entropy;
  o.results["lsi_violations"] = a.lsi_violations;
  o.results["lsi_inconclusive"] = a.lsi_inconclusive;
  log << "rate " << csv::format(a.rate) << ", identity error " << csv::format(a.identity_max_rel_error)
      << ", decay ratio " << csv::format(a.bound_max_ratio) << "\n";
  return o;
}

Outcome run_suite(const ExperimentConfig& c, const fs::path& out, std::ostream& log, bool logsobolev) {
  Outcome o;
  const InequalitySuite suite(c.params);
  const auto fns = generate_test_functions(c.suite_seed, c.suite_count, natural_scale(c.params));
  std::vector<InequalityReport> reports;
  reports.reserve(fns.size());
  std::size_t violations = 0, inconclusive = 0;
  double max_ratio = 0.0;
  for (const auto& psi : fns) {
    reports.push_back(logsobolev ? suite.logsobolev(psi) : suite.chernoff(psi));
    const auto& r = reports.back();
    violations += r.verdict == Verdict::Violation;
    inconclusive += r.verdict == Verdict::Inconclusive;
    if (std::isfinite(r.ratio)) max_ratio = std::max(max_ratio, r.ratio);
    o.checks.push_back(make_check(r, r.label));
  }
  write_suite_csv(reports, out / "suite.csv");
  o.results["constant"] = logsobolev ? logsobolev_constant(c.params) : chernoff_constant(c.params);
  o.results["weight"] = reports.front().weight_label;
  o.results["functions"] = reports.size();
  o.results["violations"] = violations;
  o.results["inconclusive"] = inconclusive;
  o.results["max_ratio"] = max_ratio;

  if (!logsobolev) {
    csv::Writer w((out / "sharpness.csv").string());
    w.header({"a", "b", "lhs", "rhs", "ratio", "deviation", "pass"});
    double worst = 0.0;
    for (const auto& [a, b] : c.sharpness) {
      const auto r = suite.sharpness(a, b);
      const double dev = std::fabs(r.ratio - 1.0);
      worst = std::max(worst, dev);
      const Check chk = make_check("sharpness |ratio-1| " + r.label, dev, c.tolerances.sharpness);
      w.cell(a).cell(b).cell(r.lhs).cell(r.rhs).cell(r.ratio).cell(dev).cell(chk.pass ? "true" : "false");
      w.end_row();
      o.checks.push_back(chk);
    }
    o.results["sharpness_max_deviation"] = worst;
  }
  log << reports.size() << " test functions, " << violations << " violations, " << inconclusive
      << " inconclusive, max ratio " << csv::format(max_ratio) << "\n";
  return o;
}

Outcome run_scaling(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
  Outcome o;
  const auto grid = c.grid.build();
  const auto f0 = initial_field(c, grid);
  std::vector<ScalingReport> reports;
  for (double m : c.scaling_m) {
    reports.push_back(scaling_equivalence_report(c.params, f0, m, c.scaling_t, c.solver, c.tolerances.scaling));
    const auto& r = reports.back();
    std::ostringstream name;
    name << "scaling m=" << m;
    o.checks.push_back(make_check(name.str(), r.sup_cdf_diff, r.tolerance));
    log << name.str() << ": sup_cdf_diff " << csv::format(r.sup_cdf_diff) << "\n";
  }
  write_scaling_csv(reports, (out / "scaling.csv").string());
  return o;
}

Outcome run_classify(const ExperimentConfig& c, std::ostream& out) {
  Outcome o;
  const auto regime = classify_boundary(c.params);
  o.results["boundary_regime"] = to_string(regime);
  if (!c.params.lognormal_limit) o.results["kappa_over_delta"] = c.params.kappa / c.params.delta;
  out << to_string(regime) << "\n";
  return o;
}

std::string versions_string() {
  std::ostringstream os;
  os << NLOHMANN_JSON_VERSION_MAJOR << "." << NLOHMANN_JSON_VERSION_MINOR << "." << NLOHMANN_JSON_VERSION_PATCH;
  return os.str();
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [cmd, name] : kCommands)
    if (cmd == c) return name;
  return "unknown";
}

Command command_from_string(const std::string& s) {
  for (const auto& [cmd, name] : kCommands)
    if (s == name) return cmd;
  throw ParameterError("unknown command '" + s + "'");
}

ExperimentConfig parse_config(const std::string& text, Command command, const std::string& source_name,
                              const Overrides& overrides) {
  const Locator loc(text, source_name);
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    const int line = line_at(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    const auto colon = what.find("] ");
    loc.fail(line, "invalid JSON: " + (colon == std::string::npos ? what : what.substr(colon + 2)));
  }
  if (!root.is_object()) loc.fail(1, "top level must be a JSON object");
  check_keys(root, "", {"description", "params", "initial", "grid", "solver", "suite", "scaling", "decay", "tolerances"},
             loc);

  ExperimentConfig c;
  c.command = command;
  if (!root.contains("params")) loc.fail(1, "missing section 'params'");
  c.params = parse_params(root.at("params"), "params", loc);
  if (needs_lsi_hypothesis(command)) {
    try {
      require_logsobolev_hypothesis(c.params);
    } catch (const PreconditionError& e) {
      loc.fail("params", "kappa", e.what());
    }
  }

  if (root.contains("initial")) c.initial = parse_params(root.at("initial"), "initial", loc);
  else if (needs_initial(command)) loc.fail(1, "missing section 'initial' (required by " + to_string(command) + ")");

  const json empty = json::object();
  const json& grid = root.contains("grid") ? root.at("grid") : empty;
  check_keys(grid, "grid", {"cells", "x_min", "x_max", "spacing", "quad_order"}, loc);
  std::size_t cells = static_cast<std::size_t>(integer(grid, "grid", "cells", 512, loc));
  if (overrides.cells) cells = *overrides.cells;
  if (cells < 16) loc.fail("grid", "cells", "grid needs at least 16 cells");
  const auto quad = integer(grid, "grid", "quad_order", 6, loc);
  if (quad < 2 || quad > 16) loc.fail("grid", "quad_order", "'grid.quad_order' must lie in [2, 16]");
  c.grid = merged_default_grid(c.params, c.initial, cells, static_cast<int>(quad));
  c.grid.x_min = positive(grid, "grid", "x_min", c.grid.x_min, loc);
  c.grid.x_max = positive(grid, "grid", "x_max", c.grid.x_max, loc);
  if (!(c.grid.x_max > c.grid.x_min)) loc.fail("grid", "x_max", "'grid.x_max' must exceed 'grid.x_min'");
  if (grid.contains("spacing")) {
    const auto& s = grid.at("spacing");
    if (!s.is_string()) loc.fail("grid", "spacing", "'grid.spacing' must be a string");
    try {
      c.grid.spacing = spacing_from_string(s.get<std::string>());
    } catch (const std::exception& e) {
      loc.fail("grid", "spacing", e.what());
    }
    if (c.grid.spacing == Spacing::Custom) loc.fail("grid", "spacing", "'grid.spacing' must be uniform or geometric");
  }

  const json& solver = root.contains("solver") ? root.at("solver") : empty;
  check_keys(solver, "solver", {"dt", "t_end", "scheme", "linear_tolerance", "cadence", "snapshot_every"}, loc);
  c.solver.dt = number(solver, "solver", "dt", 0.0, loc);
  if (c.solver.dt < 0.0) loc.fail("solver", "dt", "'solver.dt' must be nonnegative (0 selects the default)");
  if (c.solver.dt == 0.0) c.solver.dt = default_dt(c.params);
  c.solver.t_end = positive(solver, "solver", "t_end", 1.0, loc);
  c.solver.linear_tolerance = positive(solver, "solver", "linear_tolerance", 1e-10, loc);
  c.solver.cadence = static_cast<int>(integer(solver, "solver", "cadence", 1, loc));
  if (c.solver.cadence < 1) loc.fail("solver", "cadence", "'solver.cadence' must be at least 1");
  c.solver.snapshot_every = static_cast<int>(integer(solver, "solver", "snapshot_every", 0, loc));
  if (solver.contains("scheme")) {
    const auto& s = solver.at("scheme");
    if (!s.is_string()) loc.fail("solver", "scheme", "'solver.scheme' must be a string");
    try {
      c.solver.scheme = flux_scheme_from_string(s.get<std::string>());
    } catch (const std::exception& e) {
      loc.fail("solver", "scheme", e.what());
    }
  }

  const json& suite = root.contains("suite") ? root.at("suite") : empty;
  check_keys(suite, "suite", {"count", "seed", "sharpness"}, loc);
  c.suite_count = static_cast<std::size_t>(integer(suite, "suite", "count", 200, loc));
  if (c.suite_count < 1) loc.fail("suite", "count", "'suite.count' must be at least 1");
  c.suite_seed = integer(suite, "suite", "seed", 1, loc);
  if (overrides.seed) c.suite_seed = *overrides.seed;
  if (suite.contains("sharpness")) {
    const auto& s = suite.at("sharpness");
    bool ok = s.is_array();
    std::vector<std::pair<double, double>> pairs;
    if (ok) {
      for (const auto& e : s) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
          ok = false;
          break;
        }
        pairs.emplace_back(e[0].get<double>(), e[1].get<double>());
      }
    }
    if (!ok) loc.fail("suite", "sharpness", "'suite.sharpness' must be a list of [a, b] pairs");
    for (const auto& [a, b] : pairs)
      if (a == 0.0) loc.fail("suite", "sharpness", "sharpness pairs need a != 0");
    c.sharpness = pairs;
  }

  const json& scaling = root.contains("scaling") ? root.at("scaling") : empty;
  check_keys(scaling, "scaling", {"m", "t"}, loc);
  if (scaling.contains("m")) {
    const auto& m = scaling.at("m");
    c.scaling_m.clear();
    if (m.is_number()) m.get<double>() > 0.0 ? c.scaling_m.push_back(m.get<double>()) : loc.fail("scaling", "m", "'scaling.m' must be positive");
    else if (m.is_array() && !m.empty()) {
      for (const auto& e : m) {
        if (!e.is_number() || !(e.get<double>() > 0.0)) loc.fail("scaling", "m", "'scaling.m' entries must be positive numbers");
        c.scaling_m.push_back(e.get<double>());
      }
    } else {
      loc.fail("scaling", "m", "'scaling.m' must be a positive number or a nonempty list");
    }
  }
  c.scaling_t = positive(scaling, "scaling", "t", 0.5, loc);

  const json& decay = root.contains("decay") ? root.at("decay") : empty;
  check_keys(decay, "decay", {"window", "slack", "identity_tolerance", "ck_tolerance"}, loc);
  if (decay.contains("window")) {
    const auto& w = decay.at("window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
      loc.fail("decay", "window", "'decay.window' must be [t_lo, t_hi]");
    c.decay.window_lo = w[0].get<double>();
    c.decay.window_hi = w[1].get<double>();
    if (!(c.decay.window_lo > 0.0) || !(c.decay.window_hi > c.decay.window_lo))
      loc.fail("decay", "window", "'decay.window' needs 0 < t_lo < t_hi");
  }
  c.decay.slack = number(decay, "decay", "slack", c.decay.slack, loc);
  if (c.decay.slack < 0.0) loc.fail("decay", "slack", "'decay.slack' must be nonnegative");
  c.decay.identity_tolerance = positive(decay, "decay", "identity_tolerance", c.decay.identity_tolerance, loc);
  c.decay.ck_tolerance = number(decay, "decay", "ck_tolerance", c.decay.ck_tolerance, loc);
  if (command == Command::VerifyDecay && !(c.solver.t_end > c.decay.window_hi))
    loc.fail("solver", "t_end", "'solver.t_end' must exceed the decay window end");

  const json& tol = root.contains("tolerances") ? root.at("tolerances") : empty;
  check_keys(tol, "tolerances", {"steady_residual", "mass", "scaling", "sharpness"}, loc);
  c.tolerances.steady_residual = positive(tol, "tolerances", "steady_residual", c.tolerances.steady_residual, loc);
  c.tolerances.mass = positive(tol, "tolerances", "mass", c.tolerances.mass, loc);
  c.tolerances.scaling = positive(tol, "tolerances", "scaling", c.tolerances.scaling, loc);
  c.tolerances.sharpness = positive(tol, "tolerances", "sharpness", c.tolerances.sharpness, loc);

  try {
    c.solver.validate();
  } catch (const std::exception& e) {
    loc.fail("solver", "", e.what());
  }
  return c;
}

Check make_check(std::string name, double lhs, double rhs, double budget) {
  Check c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = rhs - lhs;
  c.budget = budget;
  if (!(c.margin >= -budget)) c.verdict = Verdict::Violation;  // NaN lands here
  else if (c.margin < 0.0) c.verdict = Verdict::Inconclusive;
  else c.verdict = Verdict::Pass;
  c.pass = c.verdict != Verdict::Violation;
  return c;
}

Check make_check(const InequalityReport& r, std::string name) {
  Check c;
  c.name = std::move(name);
  c.lhs = r.lhs;
  c.rhs = r.rhs;
  c.margin = r.margin;
  c.budget = r.budget;
  c.verdict = r.verdict;
  c.pass = r.pass;
  return c;
}

static int severity(Verdict v) {
  switch (v) {
    case Verdict::Pass: return 0;
    case Verdict::Inconclusive: return 1;
    case Verdict::Violation: return 2;
  }
  return 2;
}

int exit_code(const std::vector<Check>& checks) {
  int worst = 0;
  for (const auto& c : checks) worst = std::max(worst, severity(c.verdict));
  return worst == 2 ? 2 : worst == 1 ? 3 : 0;
}

DecayAnalysis analyze_decay(const Trajectory& traj, const DecayOptions& o) {
  const GenGammaParams& p = traj.params;
  require_logsobolev_hypothesis(p);
  const auto& r = traj.records;
  if (r.empty()) throw ParameterError("analyze_decay: trajectory has no records");
  DecayAnalysis a;
  a.rate = 1.0 / chernoff_constant(p);
  const double h0 = r.front().entropy;
  a.ck_max_excess = -std::numeric_limits<double>::infinity();
  a.entropy_max_increase = r.size() > 1 ? -std::numeric_limits<double>::infinity() : 0.0;
  bool have_lsi = false;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double h = r[k].entropy;
    const double envelope = h0 * std::exp(-a.rate * r[k].t);
    const double ratio = envelope > 0.0 ? h / envelope : (h > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    a.bound_max_ratio = std::max(a.bound_max_ratio, ratio);
    a.ck_max_excess = std::max(a.ck_max_excess, r[k].l1 - 2.0 * std::sqrt(std::max(0.0, h)));
    if (k > 0) a.entropy_max_increase = std::max(a.entropy_max_increase, h - r[k - 1].entropy);

    if (k > 0 && k + 1 < r.size() && r[k].t >= o.window_lo && r[k].t <= o.window_hi && r[k].fisher > 0.0) {
      const double dh = (r[k + 1].entropy - r[k - 1].entropy) / (r[k + 1].t - r[k - 1].t);
      a.identity_max_rel_error = std::max(a.identity_max_rel_error, std::fabs(dh + r[k].fisher) / r[k].fisher);
      ++a.identity_points;
    }

    const auto lsi = density_lsi_report(h, r[k].fisher, p);
    a.lsi_violations += lsi.verdict == Verdict::Violation;
    a.lsi_inconclusive += lsi.verdict == Verdict::Inconclusive;
    if (!have_lsi || severity(lsi.verdict) > severity(a.lsi_worst.verdict) ||
        (severity(lsi.verdict) == severity(a.lsi_worst.verdict) && lsi.margin < a.lsi_worst.margin)) {
      a.lsi_worst = lsi;
      have_lsi = true;
    }
  }
  if (a.identity_points == 0) throw NumericalError("analyze_decay: no records inside the identity window");
  return a;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized Gamma Fokker-Planck laboratory", "ggfp"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cells;
  bool quiet = false;
  for (const auto& [cmd, name] : kCommands) {
    (void)cmd;
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override suite.seed");
    sub->add_option("--cells", cells, "override grid.cells");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  const Command command = command_from_string(app.get_subcommands().front()->get_name());

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    err << config_path << ":0: cannot read config file\n";
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  ExperimentConfig config;
  try {
    config = parse_config(text, command, config_path, Overrides{seed, cells});
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return 1;
  }

  std::ostringstream sink;
  std::ostream& log = quiet ? static_cast<std::ostream&>(sink) : out;
  const fs::path out_path(out_dir);
  Outcome outcome;
  try {
    fs::create_directories(out_path);
    switch (command) {
      case Command::Steady: outcome = run_steady(config, out_path, log); break;
      case Command::Solve: outcome = run_solve(config, out_path, log); break;
      case Command::VerifyPoincare: outcome = run_suite(config, out_path, log, false); break;
      case Command::VerifyLogSobolev: outcome = run_suite(config, out_path, log, true); break;
      case Command::VerifyDecay: outcome = run_decay(config, out_path, log); break;
      case Command::VerifyScaling: outcome = run_scaling(config, out_path, log); break;
      case Command::Classify: outcome = run_classify(config, out); break;
    }
  } catch (const ConfigError& e) {
    err << config_path << ":" << Locator(text, config_path).line_of("initial") << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const int code = exit_code(outcome.checks);
  double max_budget = 0.0;
  json checks = json::array();
  for (const auto& c : outcome.checks) {
    checks.push_back(check_json(c));
    max_budget = std::max(max_budget, c.budget);
  }
  json summary;
  summary["command"] = to_string(command);
  summary["params"] = params_json(config.params);
  summary["config"] = config_json(config);
  summary["results"] = outcome.results;
  summary["checks"] = checks;
  summary["tolerance_budget"] = {{"tolerances", tolerances_json(config.tolerances)},
                                 {"inequality_budget_rule", "max(1e-8 max(1, rhs), quadrature error estimate)"},
                                 {"max_check_budget", max_budget}};
  summary["exit_code"] = code;
  summary["versions"] = {{"ggfp", kVersion}, {"nlohmann_json", versions_string()}, {"cli11", CLI11_VERSION}};
  {
    std::ofstream f(out_path / "summary.json", std::ios::binary);
    f << summary.dump(2) << "\n";
    if (!f) {
      err << "error: cannot write " << (out_path / "summary.json").string() << "\n";
      return 1;
    }
  }

  for (const auto& c : outcome.checks) {
    if (c.verdict == Verdict::Pass && quiet) continue;
    if (c.verdict == Verdict::Pass && outcome.checks.size() > 20) continue;
    log << to_string(c.verdict) << "  " << c.name << "  lhs=" << csv::format(c.lhs) << " rhs=" << csv::format(c.rhs)
        << "\n";
  }
  log << outcome.checks.size() << " checks, exit " << code << "\n";
  return code;
}

}  // namespace ggfp
