#include "ks2/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ks2/checks.hpp"
#include "ks2/diagnostics.hpp"
#include "ks2/hls.hpp"
#include "ks2/snapshot.hpp"

namespace ks2::cli {

namespace fs = std::filesystem;

namespace {

Parameters read_params(const Config& c) {
  Parameters p;
  p.mu = c.get_double("params.mu", 1.0);
  p.chi1 = c.get_double("params.chi1", 1.0);
  p.chi2 = c.get_double("params.chi2", 1.0);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", c.source(), e.what()));
  }
  return p;
}

Grid read_grid(const Config& c, Grid fallback) {
  Grid g = fallback;
  if (auto n = c.get_int("grid.n")) {
    if (*n < 2) throw ConfigError(fmt::format("{}: grid.n must be >= 2", c.where("grid.n")));
    g.nx = g.ny = static_cast<std::size_t>(*n);
  }
  g.half_width = c.get_double("grid.L", g.half_width);
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", c.source(), e.what()));
  }
  return g;
}

SolverConfig read_solver(const Config& c, const Grid& g) {
  SolverConfig s;
  s.epsilon = c.get_double("solver.epsilon", 2.0 * g.spacing());
  s.cfl_diffusion = c.get_double("solver.cfl_diffusion", s.cfl_diffusion);
  s.cfl_advection = c.get_double("solver.cfl_advection", s.cfl_advection);
  s.dt_floor = c.get_double("solver.dt_floor", s.dt_floor);
  if (auto cap = c.get_double("solver.blowup_density_cap")) s.blowup_density_cap = *cap;
  s.horizon = c.get_double("solver.horizon", 0.0);
  try {
    s.validate();
    if (s.epsilon < g.spacing()) {
      throw std::invalid_argument(fmt::format("solver.epsilon {} is below the grid spacing {}", s.epsilon, g.spacing()));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", c.source(), e.what()));
  }
  return s;
}

std::vector<GaussianBump> read_bumps(const Config& c, const std::string& species) {
  const std::string base = species + ".gaussian";
  std::vector<GaussianBump> out;
  for (const auto& key : c.keys_with_prefix(base)) {
    if (key.size() != base.size() && key[base.size()] != '.') continue;
    const auto v = *c.get_doubles(key);
    if (v.size() != 2 && v.size() != 4) {
      throw ConfigError(fmt::format("{}: {} expects 'mass, sigma' or 'mass, sigma, cx, cy'", c.where(key), key));
    }
    GaussianBump b{v[0], v[1], v.size() == 4 ? v[2] : 0.0, v.size() == 4 ? v[3] : 0.0};
    if (!(b.mass >= 0.0 && b.sigma > 0.0)) {
      throw ConfigError(fmt::format("{}: {} needs mass >= 0 and sigma > 0", c.where(key), key));
    }
    out.push_back(b);
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch == '\n' ? ' ' : ch;
  }
  return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::vector<double> linspace_from(const Config& c, const std::string& key) {
  const auto v = c.get_doubles(key);
  if (!v) throw ConfigError(fmt::format("{}: missing required key '{}' (min, max, count)", c.source(), key));
  if (v->size() != 3) throw ConfigError(fmt::format("{}: {} expects 'min, max, count'", c.where(key), key));
  const double lo = (*v)[0];
  const double hi = (*v)[1];
  const double count = (*v)[2];
  if (!(lo >= 0.0 && hi >= lo && hi > 0.0)) {
    throw ConfigError(fmt::format("{}: {} needs 0 <= min <= max and max > 0", c.where(key), key));
  }
  if (!(count >= 1.0 && count == std::floor(count) && count <= 1e6)) {
    throw ConfigError(fmt::format("{}: {} count must be a positive integer", c.where(key), key));
  }
  const auto n = static_cast<std::size_t>(count);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return out;
}

std::vector<double> positive_list(const Config& c, const std::string& key, double fallback) {
  auto v = c.get_doubles(key);
  if (!v) return {fallback};
  for (double x : *v) {
    if (!(std::isfinite(x) && x > 0.0)) throw ConfigError(fmt::format("{}: {} values must be positive", c.where(key), key));
  }
  return *v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config readers

RunConfig read_run_config(const Config& c) {
  RunConfig rc;
  rc.params = read_params(c);
  if (auto snap = c.get_string("init.snapshot")) {
    fs::path path(*snap);
    if (path.is_relative()) path = fs::path(c.source()).parent_path() / path;
    try {
      rc.init.snapshot = load_snapshot(path);
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("{}: {}", c.where("init.snapshot"), e.what()));
    }
    rc.init.grid = rc.init.snapshot->grid();
    if (c.has("grid.n") || c.has("grid.L")) {
      const Grid g = read_grid(c, rc.init.grid);
      if (!(g == rc.init.grid)) {
        throw ConfigError(fmt::format("{}: grid.* disagrees with the snapshot grid", c.source()));
      }
    }
  } else {
    rc.init.grid = read_grid(c, Grid{128, 128, 8.0});
  }
  rc.init.species1 = read_bumps(c, "species1");
  rc.init.species2 = read_bumps(c, "species2");
  if (rc.init.snapshot && (!rc.init.species1.empty() || !rc.init.species2.empty())) {
    throw ConfigError(fmt::format("{}: init.snapshot cannot be combined with species gaussians", c.source()));
  }
  rc.solver = read_solver(c, rc.init.grid);

  const long long cadence = c.get_int("output.cadence", 10);
  if (cadence < 1) throw ConfigError(fmt::format("{}: output.cadence must be >= 1", c.where("output.cadence")));
  rc.cadence = static_cast<std::uint64_t>(cadence);
  const std::string format = c.get_string("output.format", "csv");
  if (format == "csv") {
    rc.write_csv = true;
    rc.write_jsonl = false;
  } else if (format == "jsonl") {
    rc.write_csv = false;
    rc.write_jsonl = true;
  } else if (format == "both") {
    rc.write_csv = rc.write_jsonl = true;
  } else {
    throw ConfigError(fmt::format("{}: output.format must be csv, jsonl or both", c.where("output.format")));
  }
  const long long every = c.get_int("output.snapshot_every", 0);
  if (every < 0) throw ConfigError(fmt::format("{}: output.snapshot_every must be >= 0", c.where("output.snapshot_every")));
  rc.snapshot_every = static_cast<std::uint64_t>(every);
  return rc;
}

ClassifyConfig read_classify_config(const Config& c) {
  ClassifyConfig cc;
  cc.params = read_params(c);
  cc.masses.theta1 = c.require_double("mass.theta1");
  cc.masses.theta2 = c.require_double("mass.theta2");
  try {
    cc.masses.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", c.source(), e.what()));
  }
  cc.tol = c.get_double("classify.tol", 1e-12);
  if (!(cc.tol >= 0.0)) throw ConfigError(fmt::format("{}: classify.tol must be >= 0", c.where("classify.tol")));
  if (auto m0 = c.get_double("classify.moment0")) {
    cc.moment0 = *m0;
  } else {
    // centred Gaussians of width sigma: int n |x|^2 = 2 sigma^2 int n
    const double sigma = c.get_double("classify.sigma", 1.0);
    if (!(sigma > 0.0)) throw ConfigError(fmt::format("{}: classify.sigma must be positive", c.where("classify.sigma")));
    cc.moment0 = 2.0 * sigma * sigma *
                 (cc.params.mu / cc.params.chi1 * cc.masses.theta1 + cc.masses.theta2 / cc.params.chi2);
  }
  if (!(cc.moment0 >= 0.0)) throw ConfigError(fmt::format("{}: classify.moment0 must be >= 0", c.where("classify.moment0")));
  return cc;
}

nlohmann::ordered_json classify_report(const ClassifyConfig& c) {
  const RegionLabel label = classify(c.masses, c.params, c.tol);
  const RegionMargins mg = region_margins(c.masses, c.params);
  const double rate = moment_rate(c.masses, c.params);
  nlohmann::ordered_json j;
  j["theta1"] = c.masses.theta1;
  j["theta2"] = c.masses.theta2;
  j["mu"] = c.params.mu;
  j["chi1"] = c.params.chi1;
  j["chi2"] = c.params.chi2;
  j["label"] = std::string(to_string(label));
  j["parabola_value"] = mg.parabola;
  j["line1_margin"] = mg.line1;
  j["line2_margin"] = mg.line2;
  j["species1_threshold"] = species1_threshold(c.params);
  j["species2_threshold"] = species2_threshold(c.params);
  j["moment_rate"] = rate;
  j["moment0"] = c.moment0;
  if (auto d = predict_blowup_deadline(c.moment0, rate)) {
    j["deadline"] = *d;
  } else {
    j["deadline"] = nullptr;
  }
  std::optional<hls::AuxiliaryParams> aux;
  if (c.masses.total() > 0.0) aux = hls::find_admissible_params(c.masses, c.params);
  if (aux) {
    const auto coeff = hls::entropy_coefficients(c.params, *aux);
    j["admissible"] = {{"a", aux->a}, {"b", aux->b}, {"te_coefficients", {coeff[0], coeff[1]}}};
  } else {
    j["admissible"] = nullptr;
  }
  return j;
}

SweepConfig read_sweep_config(const Config& c) {
  SweepConfig s;
  const Parameters base = read_params(c);
  s.theta1 = linspace_from(c, "sweep.theta1");
  s.theta2 = linspace_from(c, "sweep.theta2");
  s.mu = positive_list(c, "sweep.mu", base.mu);
  s.chi1 = positive_list(c, "sweep.chi1", base.chi1);
  s.chi2 = positive_list(c, "sweep.chi2", base.chi2);
  s.tol = c.get_double("sweep.tol", 1e-12);
  if (!(s.tol >= 0.0)) throw ConfigError(fmt::format("{}: sweep.tol must be >= 0", c.where("sweep.tol")));
  const std::string action = c.get_string("sweep.action", "classify");
  if (action == "classify") {
    s.action = SweepAction::Classify;
  } else if (action == "probe") {
    s.action = SweepAction::Probe;
  } else {
    throw ConfigError(fmt::format("{}: sweep.action must be classify or probe", c.where("sweep.action")));
  }
  const long long workers = c.get_int("sweep.workers", 1);
  if (workers < 1) throw ConfigError(fmt::format("{}: sweep.workers must be >= 1", c.where("sweep.workers")));
  s.workers = static_cast<std::size_t>(workers);
  if (s.action == SweepAction::Probe) {
    s.grid = read_grid(c, s.grid);
    s.solver = read_solver(c, s.grid);
    s.solver.horizon = c.get_double("sweep.probe_horizon", 0.1);
    if (!(s.solver.horizon > 0.0 && s.solver.horizon <= kMaxProbeHorizon)) {
      throw ConfigError(fmt::format("{}: sweep.probe_horizon must lie in (0, {}]", c.where("sweep.probe_horizon"),
                                    kMaxProbeHorizon));
    }
    s.probe_sigma = c.get_double("sweep.probe_sigma", s.probe_sigma);
    if (!(s.probe_sigma > 0.0)) throw ConfigError(fmt::format("{}: sweep.probe_sigma must be positive", c.where("sweep.probe_sigma")));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

SweepRow evaluate_point(const SweepConfig& cfg, double t1, double t2, const Parameters& p) {
  SweepRow row;
  row.theta1 = t1;
  row.theta2 = t2;
  row.params = p;
  const MassPair m{t1, t2};
  try {
    row.label = std::string(to_string(classify(m, p, cfg.tol)));
    row.parabola_value = parabola_value(m, p);
    row.rate = moment_rate(m, p);
  } catch (const std::exception& e) {
    row.label = "error";
    row.probe = fmt::format("error: {}", e.what());
    return row;
  }
  if (cfg.action == SweepAction::Classify) {
    row.probe = "none";
    return row;
  }
  try {
    InitialData init;
    init.grid = cfg.grid;
    if (t1 > 0.0) init.species1 = {{t1, cfg.probe_sigma, 0.0, 0.0}};
    if (t2 > 0.0) init.species2 = {{t2, cfg.probe_sigma, 0.0, 0.0}};
    const RunOutcome out = run(init, cfg.solver, p, {}, 1000000);
    row.probe = std::string(to_string(out.reason));
  } catch (const std::exception& e) {
    row.probe = fmt::format("error: {}", e.what());
  }
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& cfg, std::size_t workers) {
  struct Point {
    double t1;
    double t2;
    Parameters p;
  };
  std::vector<Point> points;
  for (double mu : cfg.mu) {
    for (double c1 : cfg.chi1) {
      for (double c2 : cfg.chi2) {
        for (double t1 : cfg.theta1) {
          for (double t2 : cfg.theta2) points.push_back({t1, t2, Parameters{mu, c1, c2}});
        }
      }
    }
  }
  std::vector<SweepRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      rows[k] = evaluate_point(cfg, points[k].t1, points[k].t2, points[k].p);
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, points.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "theta1,theta2,mu,chi1,chi2,label,parabola_value,K,probe\n";
  for (const auto& r : rows) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g},{:.17g},{}\n", r.theta1, r.theta2, r.params.mu,
                       r.params.chi1, r.params.chi2, r.label, r.parabola_value, r.rate, csv_field(r.probe));
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<SweepRow> rows;
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != s.size()) throw std::runtime_error(fmt::format("region map line {}: bad number '{}'", line_no, s));
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 9) throw std::runtime_error(fmt::format("region map line {}: expected 9 columns", line_no));
    if (line_no == 1) {
      if (cells[0] != "theta1" || cells[8] != "probe") throw std::runtime_error("region map has an unexpected header");
      continue;
    }
    SweepRow r;
    r.theta1 = num(cells[0]);
    r.theta2 = num(cells[1]);
    r.params = Parameters{num(cells[2]), num(cells[3]), num(cells[4])};
    r.label = cells[5];
    r.parabola_value = num(cells[6]);
    r.rate = num(cells[7]);
    r.probe = cells[8];
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::ordered_json sweep_meta(const SweepConfig& cfg) {
  nlohmann::ordered_json j;
  j["columns"] = {"theta1", "theta2", "mu", "chi1", "chi2", "label", "parabola_value", "K", "probe"};
  j["row_order"] = "mu, chi1, chi2, theta1, theta2 (last varies fastest)";
  j["action"] = cfg.action == SweepAction::Classify ? "classify" : "probe";
  j["tol"] = cfg.tol;
  auto geometry = nlohmann::ordered_json::array();
  for (double mu : cfg.mu) {
    for (double c1 : cfg.chi1) {
      for (double c2 : cfg.chi2) {
        const Parameters p{mu, c1, c2};
        const double l1 = species1_threshold(p);
        const double l2 = species2_threshold(p);
        nlohmann::ordered_json g;
        g["mu"] = mu;
        g["chi1"] = c1;
        g["chi2"] = c2;
        g["line_theta1"] = l1;
        g["line_theta2"] = l2;
        // The parabola passes through (l1, 0) and (0, l2).
        g["parabola_axis_points"] = {{l1, 0.0}, {0.0, l2}};
        g["intersects_lines"] = intersects_lines(p);
        auto pts = nlohmann::ordered_json::array();
        const double on_line2 = l1 - 16.0 * kPi / c2;  // theta1 where the parabola meets theta2 = l2
        const double on_line1 = l2 - 16.0 * kPi * mu / c1;
        if (on_line2 > 0.0) pts.push_back({{"line", "theta2"}, {"theta1", on_line2}, {"theta2", l2}});
        if (on_line1 > 0.0) pts.push_back({{"line", "theta1"}, {"theta1", l1}, {"theta2", on_line1}});
        g["intersections"] = pts;
        geometry.push_back(std::move(g));
      }
    }
  }
  j["geometry"] = geometry;
  return j;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

void setup_logging() {
  auto logger = spdlog::get("ks2");
  if (!logger) logger = spdlog::stderr_color_mt("ks2");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("KS2_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string_view(env) != "off") {
      spdlog::warn("ignoring unrecognised KS2_LOG value '{}'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
}

int cmd_classify(const std::string& config_path, const std::string& out_dir) {
  const Config c = Config::load(config_path);
  const ClassifyConfig cc = read_classify_config(c);
  c.reject_unknown();
  const std::string text = classify_report(cc).dump(2) + "\n";
  std::cout << text;
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_file_atomic(fs::path(out_dir) / "classify.json", text);
  }
  return kOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> cadence) {
  const Config c = Config::load(config_path);
  RunConfig rc = read_run_config(c);
  c.reject_unknown();
  if (cadence) rc.cadence = *cadence;
  if (rc.cadence == 0) throw ConfigError("--cadence must be >= 1");
  if (rc.snapshot_every % rc.cadence != 0) {
    throw ConfigError(fmt::format("{}: output.snapshot_every ({}) must be a multiple of the cadence ({})", c.source(),
                                  rc.snapshot_every, rc.cadence));
  }
  State s0;
  try {
    s0 = make_initial_state(rc.init);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: initial data: {}", c.source(), e.what()));
  }
  const fs::path out = out_dir.empty() ? fs::path("ks2_out") : fs::path(out_dir);
  ensure_dir(out);

  std::ostringstream csv;
  std::ostringstream jsonl;
  DiagnosticsEmitter csv_out(csv, EmitFormat::Csv);
  DiagnosticsEmitter json_out(jsonl, EmitFormat::JsonLines);
  const MassPair masses{total_mass(s0.u1), total_mass(s0.u2)};
  BoundMonitor monitor(rc.params, masses);
  std::size_t snapshots = 0;

  auto sink = [&](const State& st, const DiagnosticsRecord& r) {
    if (rc.write_csv) csv_out.emit(r);
    if (rc.write_jsonl) json_out.emit(r);
    monitor.observe(r);
    if (rc.snapshot_every > 0 && st.step_count > 0 && st.step_count % rc.snapshot_every == 0) {
      save_snapshot(out / fmt::format("snapshot_{:08d}.ks2d", st.step_count), st);
      ++snapshots;
    }
    spdlog::debug("t={:.6g} E={:.10g} max_u=({:.4g}, {:.4g})", r.t, r.free_energy, r.max_u1, r.max_u2);
  };
  spdlog::info("simulating {}x{} on [-{},{}]^2 to t={} (eps={})", s0.grid().nx, s0.grid().ny, s0.grid().half_width,
               s0.grid().half_width, rc.solver.horizon, rc.solver.epsilon);
  const RunOutcome outcome = run_from(s0, rc.solver, rc.params, sink, rc.cadence);

  if (rc.write_csv) write_file_atomic(out / "diagnostics.csv", csv.str());
  if (rc.write_jsonl) write_file_atomic(out / "diagnostics.jsonl", jsonl.str());
  save_snapshot(out / "final.ks2d", outcome.final_state);

  nlohmann::ordered_json summary;
  summary["termination"] = std::string(to_string(outcome.reason));
  summary["detail"] = outcome.detail;
  if (outcome.blowup_time) {
    summary["blowup_time"] = *outcome.blowup_time;
  } else {
    summary["blowup_time"] = nullptr;
  }
  summary["steps"] = outcome.steps;
  summary["t_final"] = outcome.final_state.t;
  summary["parameters"] = {{"mu", rc.params.mu}, {"chi1", rc.params.chi1}, {"chi2", rc.params.chi2}};
  const Grid& g = outcome.final_state.grid();
  summary["grid"] = {{"n", g.nx}, {"L", g.half_width}, {"h", g.spacing()}};
  summary["solver"] = {{"epsilon", rc.solver.epsilon},
                       {"cfl_diffusion", rc.solver.cfl_diffusion},
                       {"cfl_advection", rc.solver.cfl_advection},
                       {"dt_floor", rc.solver.dt_floor},
                       {"blowup_density_cap", rc.solver.density_cap(masses.total())},
                       {"horizon", rc.solver.horizon}};
  summary["masses"] = {{"theta1", masses.theta1}, {"theta2", masses.theta2}};
  summary["classification"] = std::string(to_string(classify(masses, rc.params, 1e-9)));
  summary["moment_rate"] = moment_rate(masses, rc.params);
  summary["final_diagnostics"] = to_json(outcome.final_record);
  summary["dissipation_excluded_fraction"] = outcome.final_record.dissipation_excluded_fraction;
  summary["bounds"] = to_json(monitor.report());
  summary["snapshots"] = snapshots;
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");

  fmt::print("{} at t={:.6g} after {} steps; artifacts in {}\n", to_string(outcome.reason), outcome.final_state.t,
             outcome.steps, out.string());
  return kOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, std::optional<std::size_t> workers) {
  const Config c = Config::load(config_path);
  SweepConfig sc = read_sweep_config(c);
  c.reject_unknown();
  if (workers) sc.workers = *workers;
  if (sc.workers == 0) throw ConfigError("--workers must be >= 1");
  const fs::path out = out_dir.empty() ? fs::path("ks2_out") : fs::path(out_dir);
  ensure_dir(out);
  const auto rows = run_sweep(sc, sc.workers);
  write_file_atomic(out / "region_map.csv", sweep_csv(rows));
  write_file_atomic(out / "region_map_meta.json", sweep_meta(sc).dump(2) + "\n");
  fmt::print("{} points written to {}\n", rows.size(), (out / "region_map.csv").string());
  return kOk;
}

int cmd_check(const std::string& kind, const std::string& out_dir) {
  const CheckReport rep = run_check(kind);
  const std::string text = to_json(rep).dump(2) + "\n";
  std::cout << text;
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_file_atomic(fs::path(out_dir) / fmt::format("check_{}.json", kind), text);
  }
  for (const auto& p : rep.properties) {
    if (!p.passed) spdlog::warn("check {}: property {} failed (value {:.6g}, tolerance {:.6g})", kind, p.name, p.value, p.tolerance);
  }
  return rep.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Two-species Keller-Segel laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t cadence = 0;
  std::size_t workers = 0;
  std::string kind;

  auto* classify_cmd = app.add_subcommand("classify", "Locate a mass pair in the region map");
  classify_cmd->add_option("--config", config_path, "Config file")->required();
  classify_cmd->add_option("--out", out_dir, "Also write classify.json here");

  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate the regularised system");
  simulate_cmd->add_option("--config", config_path, "Config file")->required();
  simulate_cmd->add_option("--out", out_dir, "Output directory (default ks2_out)");
  auto* cadence_opt = simulate_cmd->add_option("--cadence", cadence, "Steps between diagnostics samples");

  auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate the region map over a mass grid");
  sweep_cmd->add_option("--config", config_path, "Config file")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory (default ks2_out)");
  auto* workers_opt = sweep_cmd->add_option("--workers", workers, "Worker threads");

  auto* check_cmd = app.add_subcommand("check", "Run a self-check suite");
  check_cmd->add_option("kind", kind, "kernel | hls | conservation")
      ->required()
      ->check(CLI::IsMember({"kernel", "hls", "conservation"}));
  check_cmd->add_option("--out", out_dir, "Also write check_<kind>.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*classify_cmd) return cmd_classify(config_path, out_dir);
    if (*simulate_cmd) {
      return cmd_simulate(config_path, out_dir, cadence_opt->count() ? std::optional<std::uint64_t>(cadence) : std::nullopt);
    }
    if (*sweep_cmd) return cmd_sweep(config_path, out_dir, workers_opt->count() ? std::optional<std::size_t>(workers) : std::nullopt);
    if (*check_cmd) return cmd_check(kind, out_dir);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "ks2: {}\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    fmt::print(stderr, "ks2: {}\n", e.what());
    return kRuntime;
  }
  return kUsage;
}

}  // namespace ks2::cli
