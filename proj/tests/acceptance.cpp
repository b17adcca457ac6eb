// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status if
// any criterion fails. Oracles are computed here, independently of the
// library routines they check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ks2/cli.hpp"
#include "ks2/diagnostics.hpp"
#include "ks2/hls.hpp"
#include "ks2/kernel.hpp"
#include "ks2/model.hpp"
#include "ks2/solver.hpp"

using namespace ks2;

namespace {

constexpr double pi = kPi;

struct Outcome {
  bool passed = true;
  std::vector<std::string> lines;

  void require(bool ok, std::string what) {
    passed = passed && ok;
    lines.push_back(fmt::format("    {} {}", ok ? "ok  " : "FAIL", what));
  }
  void note(std::string what) { lines.push_back("    " + std::move(what)); }
};

// Per-step mass drift and positivity, shared by every run in the suite.
struct ConservationLog {
  std::uint64_t steps = 0;
  double worst_drift = 0.0;
  double min_density = std::numeric_limits<double>::infinity();

  void observe(const State& prev, const State& next) {
    const double m1 = total_mass(prev.u1), m2 = total_mass(prev.u2);
    if (m1 > 0) worst_drift = std::max(worst_drift, std::abs(total_mass(next.u1) - m1) / m1);
    if (m2 > 0) worst_drift = std::max(worst_drift, std::abs(total_mass(next.u2) - m2) / m2);
    for (double v : next.u1.values) min_density = std::min(min_density, v);
    for (double v : next.u2.values) min_density = std::min(min_density, v);
    ++steps;
  }
};

ConservationLog g_conservation;

// Runs through the library driver and records each step's state transition.
struct TracedRun {
  RunOutcome outcome;
  std::vector<DiagnosticsRecord> records;
  double initial_peak = 0.0;
  double max_peak = 0.0;
};

TracedRun traced_run(const InitialData& init, const SolverConfig& cfg, const Parameters& p) {
  TracedRun tr;
  State prev;
  bool have_prev = false;
  tr.outcome = run(init, cfg, p, [&](const State& s, const DiagnosticsRecord& r) {
    if (have_prev && s.step_count > prev.step_count) g_conservation.observe(prev, s);
    prev = s;
    have_prev = true;
    tr.records.push_back(r);
    const double peak = std::max(r.max_u1, r.max_u2);
    if (tr.records.size() == 1) tr.initial_peak = peak;
    tr.max_peak = std::max(tr.max_peak, peak);
  });
  return tr;
}

InitialData gaussians(std::size_t n, double L, std::vector<GaussianBump> a, std::vector<GaussianBump> b) {
  InitialData init;
  init.grid = Grid{n, n, L};
  init.species1 = std::move(a);
  init.species2 = std::move(b);
  return init;
}

// ---------------------------------------------------------------------------
// 1 and 2: moment rate and energy dissipation on the same run

TracedRun& moment_run() {
  static TracedRun tr = [] {
    const InitialData init = gaussians(256, 8.0, {{2 * pi, 0.5}}, {{2 * pi, 0.5}});
    SolverConfig cfg;
    cfg.epsilon = 2 * init.grid.spacing();
    cfg.horizon = 0.05;
    return traced_run(init, cfg, {1.0, 1.0, 1.0});
  }();
  return tr;
}

Outcome criterion_moment_rate() {
  Outcome o;
  const TracedRun& tr = moment_run();
  o.require(tr.outcome.reason == Termination::Completed, fmt::format("run completed ({})", to_string(tr.outcome.reason)));
  // K = 4 theta1 mu/chi1 + 4 theta2/chi2 - (theta1 + theta2)^2 / 2pi
  const double K = 4 * 2 * pi + 4 * 2 * pi - (4 * pi) * (4 * pi) / (2 * pi);
  double st = 0, sm = 0, stt = 0, stm = 0;
  const double n = static_cast<double>(tr.records.size());
  for (const auto& r : tr.records) {
    st += r.t;
    sm += r.weighted_moment;
    stt += r.t * r.t;
    stm += r.t * r.weighted_moment;
  }
  const double slope = (n * stm - st * sm) / (n * stt - st * st);
  const double rel = std::abs(slope - K) / K;
  o.require(rel <= 0.03, fmt::format("fitted slope {:.6f} vs K = 8 pi = {:.6f}: relative error {:.4f} (<= 0.03)", slope, K, rel));
  o.note(fmt::format("{} samples, {} steps", tr.records.size(), tr.outcome.steps));
  return o;
}

Outcome criterion_energy() {
  Outcome o;
  const TracedRun& tr = moment_run();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < tr.records.size(); ++k) {
    const double allowance = 1e-6 * (1 + std::abs(tr.records[k - 1].free_energy));
    worst = std::min(worst, tr.records[k - 1].free_energy + allowance - tr.records[k].free_energy);
  }
  o.require(worst >= 0.0, fmt::format("free energy non-increasing at every sample (worst margin {:.3e})", worst));
  double integral = 0;
  for (std::size_t k = 1; k < tr.records.size(); ++k) {
    const auto& a = tr.records[k - 1];
    const auto& b = tr.records[k];
    integral += 0.5 * (a.dissipation + b.dissipation) * (b.t - a.t);
  }
  const double dE = tr.records.back().free_energy - tr.records.front().free_energy;
  const double rel = std::abs(dE + integral) / integral;
  o.require(rel <= 0.10, fmt::format("Delta E = {:.6f} vs -int D dt = {:.6f}: relative mismatch {:.4f} (<= 0.10)", dE,
                                     -integral, rel));
  return o;
}

// ---------------------------------------------------------------------------
// 3: conservation and positivity

Outcome criterion_conservation() {
  Outcome o;
  // Long run through step(); zero-flux walls keep the mass even if it reaches
  // the edge strip, so a boundary-leak flag does not end it.
  const Grid g{64, 64, 4.0};
  SolverConfig cfg;
  cfg.epsilon = 2 * g.spacing();
  cfg.horizon = 1e9;
  const Parameters p{1.5, 1.0, 0.8};
  const KernelTable table = KernelTable::build({cfg.epsilon, {}}, g);
  State s = make_initial_state(gaussians(64, 4.0, {{3.0, 0.4, 0.6, 0.2}, {1.0, 0.3, -1.0, -0.5}},
                                         {{4.0, 0.5, -0.4, 0.3}}));
  const std::uint64_t target = 10000;
  std::uint64_t done = 0;
  for (; done < target; ++done) {
    StepResult r = step(s, cfg, table, p);
    if (r.status == StepStatus::BlowupDetected) break;
    g_conservation.observe(s, r.state);
    s = std::move(r.state);
  }
  o.require(done == target, fmt::format("long run completed {} of {} steps (t = {:.4f})", done, target, s.t));
  o.require(g_conservation.steps >= 10000, fmt::format("{} steps observed across the suite", g_conservation.steps));
  o.require(g_conservation.worst_drift <= 1e-13,
            fmt::format("worst per-step relative mass drift {:.3e} (<= 1e-13)", g_conservation.worst_drift));
  o.require(g_conservation.min_density >= 0.0, fmt::format("minimum density {:.3e} (>= 0)", g_conservation.min_density));
  return o;
}

// ---------------------------------------------------------------------------
// 4: single-species threshold behaviour

Outcome criterion_threshold() {
  Outcome o;
  const Parameters p{1.0, 1.0, 1.0};
  {
    const InitialData init = gaussians(256, 8.0, {}, {{7 * pi, 0.5}});
    SolverConfig cfg;
    cfg.epsilon = 2 * init.grid.spacing();
    cfg.horizon = 1.0;
    const TracedRun tr = traced_run(init, cfg, p);
    o.require(tr.outcome.reason == Termination::Completed && tr.outcome.final_state.t == 1.0,
              fmt::format("(a) 7 pi: {} at t = {:.4f}", to_string(tr.outcome.reason), tr.outcome.final_state.t));
    o.require(tr.max_peak < 10 * tr.initial_peak,
              fmt::format("(a) max density {:.4f} < 10 x initial {:.4f}", tr.max_peak, tr.initial_peak));
    // Bounded entropy: no more growth than squeezing all the mass tenfold.
    double max_entropy = -std::numeric_limits<double>::infinity();
    for (const auto& r : tr.records) max_entropy = std::max(max_entropy, r.entropy2);
    const double allowance = 7 * pi * std::log(10.0);
    o.require(std::isfinite(max_entropy) && max_entropy - tr.records.front().entropy2 <= allowance,
              fmt::format("(a) entropy rise {:.4f} <= theta log 10 = {:.4f}", max_entropy - tr.records.front().entropy2,
                          allowance));
  }
  {
    const InitialData init = gaussians(256, 4.0, {}, {{10 * pi, 0.25}});
    const MassPair m{0.0, 10 * pi};
    const double m0 = 2 * 0.25 * 0.25 * 10 * pi;  // int u |x|^2 of a centred Gaussian
    const auto deadline = predict_blowup_deadline(m0, moment_rate(m, p));
    o.require(deadline.has_value(), "(b) 10 pi: finite deadline predicted");
    if (!deadline) return o;
    SolverConfig cfg;
    cfg.epsilon = 2 * init.grid.spacing();
    cfg.horizon = 1.5 * *deadline;
    const TracedRun tr = traced_run(init, cfg, p);
    const bool blew = tr.outcome.reason == Termination::BlowupDetected && tr.outcome.blowup_time &&
                      *tr.outcome.blowup_time < 1.5 * *deadline;
    o.require(blew, fmt::format("(b) {} at t = {:.5f}, deadline {:.5f}, limit {:.5f}", to_string(tr.outcome.reason),
                                tr.outcome.final_state.t, *deadline, 1.5 * *deadline));
    o.require(std::abs(tr.records.front().weighted_moment - m0) <= 1e-6 * m0,
              fmt::format("(b) sampled initial moment {:.8f} matches {:.8f}", tr.records.front().weighted_moment, m0));
  }
  return o;
}

// ---------------------------------------------------------------------------
// 5: classifier

RegionLabel raw_label(const MassPair& m, const Parameters& p) {
  const double s = m.theta1 + m.theta2;
  const double parabola = 8 * pi * (p.mu * m.theta1 / p.chi1 + m.theta2 / p.chi2) - s * s;
  const double l1 = 8 * pi * p.mu / p.chi1;
  const double l2 = 8 * pi / p.chi2;
  if (parabola == 0.0 || m.theta1 == l1 || m.theta2 == l2) return RegionLabel::Boundary;
  if (m.theta1 > l1 || m.theta2 > l2) return RegionLabel::BlowupGeneral;
  return parabola > 0.0 ? RegionLabel::GlobalExistence : RegionLabel::BlowupRadial;
}

Outcome criterion_classifier() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> logp(std::log(0.05), std::log(20.0));
  std::uniform_real_distribution<double> frac(0.0, 1.5);
  int mismatches = 0, swap_mismatches = 0;
  int counts[4] = {0, 0, 0, 0};
  for (int k = 0; k < 10000; ++k) {
    const Parameters p{std::exp(logp(rng)), std::exp(logp(rng)), std::exp(logp(rng))};
    const MassPair m{frac(rng) * 8 * pi * p.mu / p.chi1, frac(rng) * 8 * pi / p.chi2};
    const RegionLabel got = classify(m, p, 0.0);
    mismatches += got != raw_label(m, p);
    ++counts[static_cast<int>(got)];
    const auto [ms, ps] = swap_species(m, p);
    swap_mismatches += classify(ms, ps, 0.0) != got;
  }
  o.require(mismatches == 0, fmt::format("{} / 10000 disagreements with the raw inequalities", mismatches));
  o.require(swap_mismatches == 0, fmt::format("{} / 10000 labels changed under swap_species", swap_mismatches));
  o.note(fmt::format("label counts: global {}, radial {}, general {}, boundary {}",
                     counts[static_cast<int>(RegionLabel::GlobalExistence)], counts[static_cast<int>(RegionLabel::BlowupRadial)],
                     counts[static_cast<int>(RegionLabel::BlowupGeneral)], counts[static_cast<int>(RegionLabel::Boundary)]));
  return o;
}

// ---------------------------------------------------------------------------
// 6: admissible auxiliary parameters

// Scans x = 1/a on (0, 1/chi1) with `steps` points; y = 1/b follows from 8 pi (mu theta1 x + theta2 y) = (theta1 + theta2)^2.
bool scan_feasible(const MassPair& m, const Parameters& p, int steps) {
  const double s2 = m.total() * m.total();
  for (int k = 1; k < steps; ++k) {
    const double x = (static_cast<double>(k) / steps) / p.chi1;
    if (m.theta1 > 8 * pi * p.mu * x) continue;
    if (m.theta2 == 0.0) {
      if (std::abs(8 * pi * p.mu * m.theta1 * x - s2) <= s2 / steps) return true;
      continue;
    }
    const double y = (s2 - 8 * pi * p.mu * m.theta1 * x) / (8 * pi * m.theta2);
    if (y > 0 && y < 1 / p.chi2 && m.theta2 <= 8 * pi * y) return true;
  }
  return false;
}

Outcome criterion_admissible() {
  Outcome o;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> logp(std::log(0.2), std::log(5.0));
  std::uniform_real_distribution<double> frac(0.0, 1.3);
  int iff_mismatch = 0, fine_mismatch = 0, coarse_mismatch = 0, resolution_limited = 0, boundary = 0, found = 0;
  double worst_h = 0;
  int hyp_fail = 0;
  for (int k = 0; k < 1000; ++k) {
    const Parameters p{std::exp(logp(rng)), std::exp(logp(rng)), std::exp(logp(rng))};
    const MassPair m{frac(rng) * 8 * pi * p.mu / p.chi1, frac(rng) * 8 * pi / p.chi2};
    const auto aux = hls::find_admissible_params(m, p);
    iff_mismatch += aux.has_value() != (classify(m, p, 0.0) == RegionLabel::GlobalExistence);
    if (classify(m, p, 1e-2) == RegionLabel::Boundary) {
      ++boundary;
    } else {
      const bool coarse = scan_feasible(m, p, 1000);
      const bool fine = scan_feasible(m, p, 100000);
      fine_mismatch += aux.has_value() != fine;
      if (coarse != fine) {
        ++resolution_limited;
      } else {
        coarse_mismatch += aux.has_value() != coarse;
      }
    }
    if (!aux) continue;
    ++found;
    const double lhs = 8 * pi * (p.mu * m.theta1 / aux->a + m.theta2 / aux->b);
    const double rhs = m.total() * m.total();
    worst_h = std::max(worst_h, std::abs(lhs - rhs) / rhs);
    hyp_fail += !(aux->a > p.chi1 && aux->b > p.chi2);
  }
  o.require(iff_mismatch == 0, fmt::format("result present iff GlobalExistence: {} / 1000 disagreements", iff_mismatch));
  o.require(coarse_mismatch == 0,
            fmt::format("grid oracle at 1e-3: {} disagreements ({} near-boundary and {} sub-resolution strips skipped)",
                        coarse_mismatch, boundary, resolution_limited));
  o.require(fine_mismatch == 0, fmt::format("grid oracle at 1e-5 on every non-boundary sample: {} disagreements", fine_mismatch));
  o.require(worst_h <= 1e-12, fmt::format("8pi(mu theta1/a + theta2/b) = (theta1 + theta2)^2 to {:.2e} relative on {} returned pairs", worst_h, found));
  o.require(hyp_fail == 0, fmt::format("a > chi1 and b > chi2 on every returned pair ({} failures)", hyp_fail));
  return o;
}

// ---------------------------------------------------------------------------
// 7: kernel contract

Outcome criterion_kernel() {
  Outcome o;
  const KernelProfile unit{1.0, {}};
  auto log_kernel = [](double r) { return -std::log(r) / (2 * pi); };

  double tail = 0;
  for (double eps : {1.0, 0.3, 0.0625}) {
    const KernelProfile prof{eps, {}};
    for (int k = 0; k <= 4000; ++k) {
      const double r = 4 * eps * std::pow(25.0, k / 4000.0);
      const double a = 0.37 * k;
      tail = std::max(tail, std::abs(kernel_value(prof, {r * std::cos(a), r * std::sin(a)}) - log_kernel(r)));
    }
  }
  o.require(tail <= 1e-12, fmt::format("far field |K - log kernel| on |z| >= 4 eps: {:.2e} (<= 1e-12)", tail));

  double core = 0;
  for (int k = 0; k <= 1000; ++k) {
    const double r = k / 1000.0;
    const Vec2 gk = kernel_gradient(unit, {r * 0.6, r * 0.8});
    core = std::max({core, std::abs(kernel_value(unit, {r * 0.6, r * 0.8})), std::abs(gk.x), std::abs(gk.y)});
  }
  o.require(core == 0.0, fmt::format("zero core: max |K|, |grad K| on |z| <= eps = {:.2e}", core));

  double rise = -std::numeric_limits<double>::infinity();
  double prev = kernel_value(unit, {1.0, 0.0});
  for (int k = 1; k <= 30000; ++k) {
    const double r = 1.0 + 3.0 * k / 30000.0;
    const double v = kernel_value(unit, {r, 0.0});
    rise = std::max(rise, v - prev);
    prev = v;
  }
  o.require(rise <= 0.0, fmt::format("radially non-increasing on [eps, 4 eps]: largest step {:.2e}", rise));

  double cg = 0;
  for (int k = 1; k <= 200000; ++k) {
    const double r = 5.0 * k / 200000.0;
    const Vec2 gk = kernel_gradient(unit, {r, 0.0});
    cg = std::max(cg, 2 * pi * r * std::hypot(gk.x, gk.y));
  }
  o.require(cg <= 1.1, fmt::format("measured C_g = sup 2 pi |z| |grad K| = {:.5f} (<= 1.1)", cg));

  double above = -std::numeric_limits<double>::infinity();
  double where = 0;
  for (int k = 0; k <= 100000; ++k) {
    const double r = 1.0 + 9.0 * k / 100000.0;
    const double d = kernel_value(unit, {r, 0.0}) - log_kernel(r);
    if (d > above) {
      above = d;
      where = r;
    }
  }
  o.require(above <= 1e-12,
            fmt::format("pointwise K <= log kernel on |z| >= eps: max excess {:.5f} at |z| = {:.3f} eps", above, where));

  // Gaussian velocity: grad v = -(M / 2 pi r)(1 - exp(-r^2 / 2 sigma^2)) x / r.
  const Grid g{256, 256, 8.0};
  const double eps = 2 * g.spacing(), M = 1.0, sig = 1.0;
  const KernelTable table = KernelTable::build({eps, {}}, g);
  Field rho(g);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      rho.at(i, j) = M / (2 * pi * sig * sig) * std::exp(-(g.x(i) * g.x(i) + g.y(j) * g.y(j)) / (2 * sig * sig));
    }
  }
  const ChemoField c = chemo_field(table, rho, Field(g));
  double vel = 0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const double x = g.x(i), y = g.y(j), r = std::hypot(x, y);
      if (!(r > 4 * eps && r < g.half_width / 2)) continue;
      const double mag = M / (2 * pi * r) * (1 - std::exp(-r * r / (2 * sig * sig)));
      const double ex = -mag * x / r, ey = -mag * y / r;
      vel = std::max(vel, std::hypot(c.grad_x.at(i, j) - ex, c.grad_y.at(i, j) - ey) / mag);
    }
  }
  o.require(vel <= 0.01, fmt::format("Gaussian velocity on 4 eps < r < L/2: max relative error {:.4f} (<= 0.01)", vel));
  return o;
}

// ---------------------------------------------------------------------------
// 8: HLS predicates

double lam(const std::vector<double>& A, std::size_t n, const std::vector<double>& M, std::uint32_t J, double* scale) {
  double lin = 0, quad = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!((J >> i) & 1u)) continue;
    lin += M[i];
    for (std::size_t j = 0; j < n; ++j) {
      if ((J >> j) & 1u) quad += A[i * n + j] * M[i] * M[j];
    }
  }
  if (scale) *scale = std::max(8 * pi * lin, quad);
  return 8 * pi * lin - quad;
}

struct Predicates {
  bool bounded = false;
  bool minimizer = false;
};

Predicates oracle_predicates(const std::vector<double>& A_full, std::size_t n_full, const std::vector<double>& M_full) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n_full; ++i) {
    if (M_full[i] > 0) keep.push_back(i);
  }
  const std::size_t n = keep.size();
  std::vector<double> A(n * n), M(n);
  for (std::size_t i = 0; i < n; ++i) {
    M[i] = M_full[keep[i]];
    for (std::size_t j = 0; j < n; ++j) A[i * n + j] = A_full[keep[i] * n_full + keep[j]];
  }
  const std::uint32_t full = (1u << n) - 1u;
  auto zero = [&](std::uint32_t J) {
    double s;
    const double v = lam(A, n, M, J, &s);
    return std::abs(v) <= 1e-12 * s;
  };
  Predicates out;
  if (!zero(full)) return out;
  out.bounded = true;
  out.minimizer = true;
  for (std::uint32_t J = 1; J <= full; ++J) {
    const double v = lam(A, n, M, J, nullptr);
    const bool z = zero(J);
    if (J != full && !(v > 0 && !z)) out.minimizer = false;
    if (v < 0 && !z) out.bounded = false;
    if (z) {
      for (std::size_t i = 0; i < n; ++i) {
        if (((J >> i) & 1u) && !(A[i * n + i] + lam(A, n, M, J & ~(1u << i), nullptr) > 0)) out.bounded = false;
      }
    }
  }
  return out;
}

Outcome criterion_hls() {
  Outcome o;
  using hls::InteractionMatrix;
  const std::vector<double> one{8 * pi}, half{4 * pi}, two{8 * pi, 8 * pi};
  const InteractionMatrix a1(1, {1.0}), off(2, {0, 1, 1, 0}), diag(2, {1, 0, 0, 1});
  const bool examples = hls::check_bounded_below(a1, one) && !hls::check_bounded_below(a1, half) &&
                        hls::check_bounded_below(off, two) && hls::check_minimizer_exists(a1, one) &&
                        hls::check_minimizer_exists(off, two) && !hls::check_minimizer_exists(diag, two);
  o.require(examples, "worked instances: [[1]] with 8pi / 4pi, [[0,1],[1,0]] and [[1,0],[0,1]] with (8pi, 8pi)");

  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int implication = 0, disagreements = 0, minimizers = 0, bounded = 0;
  for (int k = 0; k < 10000; ++k) {
    const std::size_t n = 1 + k % 4;
    std::vector<double> A(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double v = U(rng) < 0.2 ? 0.0 : 2 * U(rng);
        A[i * n + j] = A[j * n + i] = v;
      }
    }
    std::vector<double> M(n);
    for (auto& m : M) m = U(rng) < 0.1 ? 0.0 : 0.1 + U(rng);
    // Scale the masses onto Lambda_I = 0 where possible, otherwise keep them.
    // A third of the samples with n >= 2 are split into two decoupled blocks,
    // each put on its own Lambda = 0, so that proper subsets also vanish.
    const std::size_t split = n >= 2 && U(rng) < 1.0 / 3.0 ? 1 + k % (n - 1) : n;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if ((i < split) != (j < split)) A[i * n + j] = 0.0;
      }
    }
    const bool scale = U(rng) < 0.9;
    for (const auto& [lo, hi] : {std::pair<std::size_t, std::size_t>{0, split}, {split, n}}) {
      double lin = 0, quad = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        lin += M[i];
        for (std::size_t j = lo; j < hi; ++j) quad += A[i * n + j] * M[i] * M[j];
      }
      if (scale && quad > 0 && lin > 0) {
        for (std::size_t i = lo; i < hi; ++i) M[i] *= 8 * pi * lin / quad;
      }
    }
    const InteractionMatrix am(n, A);
    const bool b = hls::check_bounded_below(am, M);
    const bool mz = hls::check_minimizer_exists(am, M);
    implication += mz && !b;
    minimizers += mz;
    bounded += b;
    const Predicates ref = oracle_predicates(A, n, M);
    disagreements += (ref.bounded != b) + (ref.minimizer != mz);
  }
  o.require(implication == 0, fmt::format("minimizer => bounded on 10^4 samples, n <= 4: {} violations", implication));
  o.require(disagreements == 0, fmt::format("independent predicate evaluation: {} disagreements", disagreements));
  o.require(minimizers > 100 && bounded > minimizers,
            fmt::format("non-trivial sample: {} with a minimizer, {} bounded below", minimizers, bounded));
  return o;
}

// ---------------------------------------------------------------------------
// 9: symmetry

Outcome criterion_symmetry() {
  Outcome o;
  const Grid g{64, 64, 4.0};
  SolverConfig cfg;
  cfg.epsilon = 2 * g.spacing();
  cfg.horizon = 1e9;
  const KernelTable table = KernelTable::build({cfg.epsilon, {}}, g);
  const std::vector<GaussianBump> bumps{{3.0, 0.5, 0.4, -0.2}, {1.5, 0.3, -0.7, 0.6}};
  State s = make_initial_state(gaussians(64, 4.0, bumps, bumps));
  const Parameters p{1.0, 1.3, 1.3};
  int steps = 0;
  bool identical = true;
  for (; steps < 1000 && identical; ++steps) {
    StepResult r = step(s, cfg, table, p);
    if (r.status == StepStatus::BlowupDetected) break;
    g_conservation.observe(s, r.state);
    s = std::move(r.state);
    identical = s.u1.values == s.u2.values;
  }
  o.require(identical && steps == 1000, fmt::format("u1 == u2 bitwise for {} steps", steps));

  cli::SweepConfig sc;
  for (int k = 0; k < 25; ++k) sc.theta1.push_back(2.0 * k);
  sc.theta2 = sc.theta1;
  sc.mu = {0.5, 1.0, 2.0};
  sc.chi1 = {1.0, 3.0};
  sc.chi2 = {0.7, 1.0};
  const std::string base = cli::sweep_csv(cli::run_sweep(sc, 1));
  bool same = true;
  for (std::size_t w : {2u, 3u, 8u}) same = same && cli::sweep_csv(cli::run_sweep(sc, w)) == base;
  o.require(same, fmt::format("classify sweep of {} points byte-identical for 1, 2, 3 and 8 workers",
                              sc.theta1.size() * sc.theta2.size() * 12));

  cli::SweepConfig probe;
  probe.theta1 = {1.0, 10.0, 20.0};
  probe.theta2 = {2.0, 12.0, 30.0};
  probe.mu = {1.0};
  probe.chi1 = {1.0};
  probe.chi2 = {1.0};
  probe.action = cli::SweepAction::Probe;
  probe.grid = Grid{32, 32, 3.0};
  probe.solver.epsilon = 2 * probe.grid.spacing();
  probe.solver.horizon = 0.02;
  const std::string pb = cli::sweep_csv(cli::run_sweep(probe, 1));
  o.require(pb == cli::sweep_csv(cli::run_sweep(probe, 4)), "probe sweep of 9 short runs byte-identical for 1 and 4 workers");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  // Conservation runs after the simulation criteria so that its step log
  // covers their runs as well.
  const std::vector<std::pair<int, Criterion>> order{
      {1, {"moment-rate oracle", criterion_moment_rate}},
      {2, {"energy dissipation", criterion_energy}},
      {4, {"single-species threshold behaviour", criterion_threshold}},
      {5, {"classifier equivalence", criterion_classifier}},
      {6, {"admissible auxiliary parameters", criterion_admissible}},
      {7, {"kernel contract", criterion_kernel}},
      {8, {"HLS conditions", criterion_hls}},
      {9, {"symmetry", criterion_symmetry}},
      {3, {"conservation and positivity", criterion_conservation}},
  };
  std::vector<std::pair<int, std::string>> summary;
  bool all = true;
  // Optional arguments select criteria by number; the default runs all.
  std::vector<int> only;
  for (int k = 1; k < argc; ++k) only.push_back(std::atoi(argv[k]));
  for (const auto& [id, c] : order) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, fmt::format("exception: {}", e.what()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && o.passed;
    fmt::print("criterion {} ({}) [{:.1f} s]\n", id, c.name, secs);
    for (const auto& l : o.lines) fmt::print("{}\n", l);
    summary.emplace_back(id, fmt::format("{} criterion {}: {}", o.passed ? "PASS" : "FAIL", id, c.name));
    std::fflush(stdout);
  }
  std::sort(summary.begin(), summary.end());
  fmt::print("\n");
  for (const auto& [id, line] : summary) fmt::print("{}\n", line);
  return all ? 0 : 1;
}
