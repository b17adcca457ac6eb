#include "ks2/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace ks2 {

void State::validate() const {
  u1.grid.validate();
  if (!(u1.grid == u2.grid)) throw std::invalid_argument("u1 and u2 must share the grid geometry");
  if (u1.values.size() != u1.grid.cells() || u2.values.size() != u2.grid.cells()) {
    throw std::invalid_argument("field storage does not match the grid");
  }
  if (!(std::isfinite(t) && t >= 0.0)) throw std::invalid_argument(fmt::format("state time must be >= 0, got {}", t));
  for (const Field* f : {&u1, &u2}) {
    for (double v : f->values) {
      if (!(std::isfinite(v) && v >= 0.0)) {
        throw std::invalid_argument(fmt::format("density must be finite and nonnegative, found {}", v));
      }
    }
  }
}

void SolverConfig::validate() const {
  if (!(std::isfinite(epsilon) && epsilon > 0.0)) {
    throw std::invalid_argument(fmt::format("solver.epsilon must be positive, got {}", epsilon));
  }
  if (!(cfl_diffusion > 0.0 && cfl_diffusion < 1.0)) {
    throw std::invalid_argument(fmt::format("solver.cfl_diffusion must lie in (0,1), got {}", cfl_diffusion));
  }
  if (!(cfl_advection > 0.0 && cfl_advection < 1.0)) {
    throw std::invalid_argument(fmt::format("solver.cfl_advection must lie in (0,1), got {}", cfl_advection));
  }
  if (cfl_diffusion + 2.0 * std::sqrt(2.0) * cfl_advection > 1.0) {
    throw std::invalid_argument(fmt::format(
        "cfl_diffusion + 2*sqrt(2)*cfl_advection = {} exceeds 1; positivity is not guaranteed",
        cfl_diffusion + 2.0 * std::sqrt(2.0) * cfl_advection));
  }
  if (!(std::isfinite(dt_floor) && dt_floor > 0.0)) {
    throw std::invalid_argument(fmt::format("solver.dt_floor must be positive, got {}", dt_floor));
  }
  if (blowup_density_cap && !(std::isfinite(*blowup_density_cap) && *blowup_density_cap > 0.0)) {
    throw std::invalid_argument(fmt::format("solver.blowup_density_cap must be positive, got {}", *blowup_density_cap));
  }
  if (!(std::isfinite(horizon) && horizon >= 0.0)) {
    throw std::invalid_argument(fmt::format("solver.horizon must be >= 0, got {}", horizon));
  }
}

double SolverConfig::density_cap(double total_mass) const {
  if (blowup_density_cap) return *blowup_density_cap;
  return 0.25 * total_mass / (kPi * epsilon * epsilon);
}

// ---------------------------------------------------------------------------
// Initial data

namespace {

void add_bumps(Field& u, const std::vector<GaussianBump>& bumps, const char* species) {
  const Grid& g = u.grid;
  for (const auto& b : bumps) {
    if (!(std::isfinite(b.mass) && b.mass >= 0.0)) {
      throw std::invalid_argument(fmt::format("{}: bump mass must be >= 0, got {}", species, b.mass));
    }
    if (!(std::isfinite(b.sigma) && b.sigma > 0.0)) {
      throw std::invalid_argument(fmt::format("{}: bump sigma must be positive, got {}", species, b.sigma));
    }
    if (!(std::isfinite(b.cx) && std::isfinite(b.cy))) {
      throw std::invalid_argument(fmt::format("{}: bump centre must be finite", species));
    }
    const double peak = b.mass / (2.0 * kPi * b.sigma * b.sigma);
    const double inv = 1.0 / (2.0 * b.sigma * b.sigma);
    for (std::size_t j = 0; j < g.ny; ++j) {
      const double dy = g.y(j) - b.cy;
      for (std::size_t i = 0; i < g.nx; ++i) {
        const double dx = g.x(i) - b.cx;
        u.at(i, j) += peak * std::exp(-(dx * dx + dy * dy) * inv);
      }
    }
  }
}

void check_integrability(const Field& u, const char* species) {
  const Grid& g = u.grid;
  std::vector<double> weight(g.cells());
  std::vector<double> ent(g.cells());
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double v = u.at(i, j);
      const double r2 = g.x(i) * g.x(i) + g.y(j) * g.y(j);
      weight[j * g.nx + i] = v * (1.0 + r2);
      ent[j * g.nx + i] = v > kDensityFloor ? std::abs(v * std::log(v)) : 0.0;
    }
  }
  if (!std::isfinite(pairwise_sum(weight) * g.cell_area())) {
    throw std::invalid_argument(fmt::format("{}: int u (1 + |x|^2) is not finite", species));
  }
  if (!std::isfinite(pairwise_sum(ent) * g.cell_area())) {
    throw std::invalid_argument(fmt::format("{}: int |u log u| is not finite", species));
  }
}

}  // namespace

State make_initial_state(const InitialData& init) {
  State s;
  if (init.snapshot) {
    s = *init.snapshot;
  } else {
    init.grid.validate();
    s.u1 = Field(init.grid);
    s.u2 = Field(init.grid);
    add_bumps(s.u1, init.species1, "species1");
    add_bumps(s.u2, init.species2, "species2");
  }
  s.validate();
  check_integrability(s.u1, "species1");
  check_integrability(s.u2, "species2");
  return s;
}

// ---------------------------------------------------------------------------
// Time step

double stable_dt(const State& s, const Field& grad_x, const Field& grad_y, const SolverConfig& cfg, const Parameters& p) {
  const double h = s.grid().spacing();
  const double dt_diff = cfg.cfl_diffusion * h * h / (4.0 * std::max(p.mu, 1.0));
  double g2 = 0.0;
  for (std::size_t k = 0; k < grad_x.values.size(); ++k) {
    g2 = std::max(g2, grad_x.values[k] * grad_x.values[k] + grad_y.values[k] * grad_y.values[k]);
  }
  const double speed = std::max(p.chi1, p.chi2) * std::sqrt(g2);
  if (!(speed > 0.0)) return dt_diff;
  return std::min(dt_diff, cfg.cfl_advection * h / speed);
}

namespace {

double bernoulli(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - 0.5 * x;
  return x / std::expm1(x);
}

// Flux from cell L to cell R (positive towards R).
double face_flux(double uL, double uR, double a, double D, double h) {
  const double P = a * h / D;
  return D / h * (bernoulli(-P) * uL - bernoulli(P) * uR);
}

// Writes u - dt div F into `out`. Both species go through this function so
// that equal inputs give bitwise equal outputs.
void advance(const Field& u, const Field& gx, const Field& gy, double D, double chi, double dt, Field& out) {
  const Grid& g = u.grid;
  const std::size_t nx = g.nx;
  const std::size_t ny = g.ny;
  const double h = g.spacing();
  // fx[j * (nx + 1) + i] is the flux through the face left of cell i.
  std::vector<double> fx((nx + 1) * ny, 0.0);
  std::vector<double> fy((ny + 1) * nx, 0.0);

#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 1; i < nx; ++i) {
      const double a = chi * 0.5 * (gx.at(i - 1, j) + gx.at(i, j));
      fx[j * (nx + 1) + i] = face_flux(u.at(i - 1, j), u.at(i, j), a, D, h);
    }
  }
#pragma omp parallel for schedule(static)
  for (std::size_t j = 1; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double a = chi * 0.5 * (gy.at(i, j - 1) + gy.at(i, j));
      fy[j * nx + i] = face_flux(u.at(i, j - 1), u.at(i, j), a, D, h);
    }
  }

  if (!(out.grid == g) || out.values.size() != g.cells()) out = Field(g);
  const double r = dt / h;
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double div = (fx[j * (nx + 1) + i + 1] - fx[j * (nx + 1) + i]) + (fy[(j + 1) * nx + i] - fy[j * nx + i]);
      out.at(i, j) = u.at(i, j) - r * div;
    }
  }
}

}  // namespace

StepResult step(const State& s, const SolverConfig& cfg, const KernelTable& table, const Parameters& p) {
  const Grid& g = s.grid();
  Field rho(g);
  for (std::size_t k = 0; k < rho.values.size(); ++k) rho.values[k] = s.u1.values[k] + s.u2.values[k];
  Field gx(g);
  Field gy(g);
  chemo_gradient(table, rho, gx, gy);

  StepResult result;
  double dt = stable_dt(s, gx, gy, cfg, p);
  if (dt < cfg.dt_floor) {
    result.state = s;
    result.status = StepStatus::BlowupDetected;
    result.dt = dt;
    result.detail = fmt::format("stable step {:.3e} fell below dt_floor {:.3e}", dt, cfg.dt_floor);
    return result;
  }
  bool lands_on_horizon = false;
  if (s.t < cfg.horizon && s.t + dt >= cfg.horizon) {
    dt = cfg.horizon - s.t;
    lands_on_horizon = true;
  }

  result.state.t = lands_on_horizon ? cfg.horizon : s.t + dt;
  result.state.step_count = s.step_count + 1;
  advance(s.u1, gx, gy, p.mu, p.chi1, dt, result.state.u1);
  advance(s.u2, gx, gy, 1.0, p.chi2, dt, result.state.u2);
  result.dt = dt;

  const double mass = total_mass(result.state.u1) + total_mass(result.state.u2);
  const double peak = std::max(max_value(result.state.u1.span()), max_value(result.state.u2.span()));
  const double cap = cfg.density_cap(mass);
  if (peak > 0.0 && peak >= cap) {
    result.status = StepStatus::BlowupDetected;
    result.detail = fmt::format("max density {:.6e} reached the cap {:.6e}", peak, cap);
    return result;
  }
  const double leak = boundary_mass_fraction(result.state);
  if (leak > 0.01) {
    result.status = StepStatus::BoundaryLeak;
    result.detail = fmt::format("{:.3f}% of the mass lies within 4 cells of the boundary", 100.0 * leak);
  }
  return result;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Completed: return "Completed";
    case Termination::BlowupDetected: return "BlowupDetected";
    case Termination::BoundaryLeak: return "BoundaryLeak";
  }
  return "?";
}

RunOutcome run(const InitialData& init, const SolverConfig& cfg, const Parameters& p,
               const DiagnosticsSink& sink, std::uint64_t cadence) {
  return run_from(make_initial_state(init), cfg, p, sink, cadence);
}

RunOutcome run_from(State s, const SolverConfig& cfg, const Parameters& p,
                    const DiagnosticsSink& sink, std::uint64_t cadence) {
  p.validate();
  cfg.validate();
  s.validate();
  if (cadence == 0) throw std::invalid_argument("diagnostics cadence must be >= 1");
  const KernelTable table = KernelTable::build(KernelProfile{cfg.epsilon, {}}, s.grid());

  auto record_of = [&](const State& st, double dt) {
    return make_record(st, chemo_field(table, st.u1, st.u2), p, dt);
  };

  RunOutcome out;
  double last_dt = 0.0;
  std::uint64_t since_emit = 0;
  if (sink) sink(s, record_of(s, 0.0));

  while (s.t < cfg.horizon) {
    StepResult r = step(s, cfg, table, p);
    if (r.status == StepStatus::BlowupDetected && r.state.step_count == s.step_count) {
      // dt collapse: nothing was advanced
      out.reason = Termination::BlowupDetected;
      out.blowup_time = s.t;
      out.detail = r.detail;
      break;
    }
    s = std::move(r.state);
    last_dt = r.dt;
    ++out.steps;
    ++since_emit;
    if (r.status != StepStatus::Ok) {
      out.reason = r.status == StepStatus::BlowupDetected ? Termination::BlowupDetected : Termination::BoundaryLeak;
      if (r.status == StepStatus::BlowupDetected) out.blowup_time = s.t;
      out.detail = r.detail;
      break;
    }
    if (sink && since_emit == cadence && s.t < cfg.horizon) {
      sink(s, record_of(s, last_dt));
      since_emit = 0;
    }
  }

  out.final_record = record_of(s, last_dt);
  if (sink && since_emit > 0) sink(s, out.final_record);
  if (out.reason != Termination::Completed) {
    spdlog::info("run stopped at t={:.6g} after {} steps: {} ({})", s.t, out.steps, to_string(out.reason), out.detail);
  }
  out.final_state = std::move(s);
  return out;
}

}  // namespace ks2
