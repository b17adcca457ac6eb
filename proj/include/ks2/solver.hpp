#pragma once

// Explicit finite-volume integrator for
//   d_t u1 = mu Lap u1 - chi1 div(u1 grad v),
//   d_t u2 =    Lap u2 - chi2 div(u2 grad v),   v = K^eps * (u1 + u2),
// on [-L, L]^2 with zero flux through the outer faces.
//
// Each face flux is the exponentially fitted (Scharfetter-Gummel) flux
//   F = (D/h) [B(-P) u_L - B(P) u_R],  P = a h / D,  B(x) = x / (e^x - 1),
// with face velocity a = chi (g_L + g_R) / 2 from the cell-centred grad v.
// It is upwind for |P| >> 1 and central for |P| << 1. Forward Euler under
// cfl_diffusion + 2 sqrt(2) cfl_advection <= 1 keeps every density
// nonnegative; the flux form conserves mass to round-off.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ks2/diagnostics.hpp"
#include "ks2/kernel.hpp"
#include "ks2/model.hpp"
#include "ks2/state.hpp"

namespace ks2 {

struct SolverConfig {
  double epsilon = 0.0;
  double cfl_diffusion = 0.5;
  double cfl_advection = 0.15;
  double dt_floor = 1e-10;
  /// Default: a quarter of the total mass spread evenly over the kernel core,
  /// 0.25 (theta1 + theta2) / (pi eps^2).
  std::optional<double> blowup_density_cap;
  double horizon = 0.0;

  /// Throws std::invalid_argument on out-of-range values, including a CFL
  /// pair that breaks the positivity bound.
  void validate() const;
  double density_cap(double total_mass) const;
};

struct GaussianBump {
  double mass = 0.0;
  double sigma = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

struct InitialData {
  Grid grid;
  std::vector<GaussianBump> species1;
  std::vector<GaussianBump> species2;
  /// Overrides the bumps (and the grid) when present.
  std::optional<State> snapshot;
};

/// Samples the bumps at cell centres (or takes the snapshot) and checks that
/// int u (1 + |x|^2) and int |u log u| are finite. Throws std::invalid_argument.
State make_initial_state(const InitialData& init);

double stable_dt(const State& s, const Field& grad_x, const Field& grad_y, const SolverConfig& cfg, const Parameters& p);

enum class StepStatus { Ok, BlowupDetected, BoundaryLeak };

struct StepResult {
  State state;
  StepStatus status = StepStatus::Ok;
  double dt = 0.0;
  std::string detail;
};

/// One forward-Euler step. The step is shortened to land exactly on
/// cfg.horizon when the state is before it. When the stable step falls below
/// dt_floor the input state is returned unchanged with BlowupDetected.
StepResult step(const State& s, const SolverConfig& cfg, const KernelTable& table, const Parameters& p);

enum class Termination { Completed, BlowupDetected, BoundaryLeak };
std::string_view to_string(Termination t);

struct RunOutcome {
  State final_state;
  Termination reason = Termination::Completed;
  std::optional<double> blowup_time;
  std::uint64_t steps = 0;  ///< steps taken by this call
  DiagnosticsRecord final_record;
  std::string detail;
};

/// Receives the state and its diagnostics record. Called for the initial
/// state, after every `cadence` steps, and for the final state.
using DiagnosticsSink = std::function<void(const State&, const DiagnosticsRecord&)>;

RunOutcome run(const InitialData& init, const SolverConfig& cfg, const Parameters& p,
               const DiagnosticsSink& sink = {}, std::uint64_t cadence = 1);

/// Continues from an existing state (e.g. a loaded snapshot).
RunOutcome run_from(State s, const SolverConfig& cfg, const Parameters& p,
                    const DiagnosticsSink& sink = {}, std::uint64_t cadence = 1);

}  // namespace ks2
