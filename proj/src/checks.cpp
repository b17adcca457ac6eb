#include "ks2/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "ks2/diagnostics.hpp"
#include "ks2/hls.hpp"
#include "ks2/model.hpp"
#include "ks2/solver.hpp"

namespace ks2 {

bool CheckReport::passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.passed; });
}

const PropertyResult* CheckReport::find(std::string_view name) const {
  for (const auto& p : properties) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

nlohmann::ordered_json to_json(const CheckReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind;
  j["passed"] = r.passed();
  auto props = nlohmann::ordered_json::array();
  for (const auto& p : r.properties) {
    nlohmann::ordered_json e;
    e["name"] = p.name;
    e["passed"] = p.passed;
    e["value"] = p.value;
    e["tolerance"] = p.tolerance;
    e["margin"] = p.margin;
    if (!p.detail.empty()) e["detail"] = p.detail;
    props.push_back(std::move(e));
  }
  j["properties"] = std::move(props);
  return j;
}

namespace {

// value must not exceed tolerance
PropertyResult at_most(std::string name, double value, double tolerance, std::string detail = {}) {
  const double margin = tolerance - value;
  return {std::move(name), std::isfinite(value) && margin >= 0.0, value, tolerance, margin, std::move(detail)};
}

PropertyResult holds(std::string name, bool ok, std::string detail = {}) {
  return {std::move(name), ok, ok ? 1.0 : 0.0, 1.0, ok ? 0.0 : -1.0, std::move(detail)};
}

double log_tail(double r) { return -std::log(r) / (2.0 * kPi); }

}  // namespace

// ---------------------------------------------------------------------------
// Kernel

CheckReport check_kernel(const KernelCheckOptions& opt) {
  const KernelProfile& prof = opt.profile;
  prof.validate();
  const double eps = prof.epsilon;
  CheckReport rep{"kernel", {}};

  // Dense radial samples.
  constexpr int kSamples = 20000;
  double tail_err = 0.0;
  for (int k = 0; k <= kSamples; ++k) {
    const double r = 4.0 * eps * std::exp(std::log(16.0) * k / kSamples);
    tail_err = std::max(tail_err, std::abs(kernel_value(prof, {r, 0.0}) - log_tail(r)));
  }
  rep.properties.push_back(at_most("far_field_exact", tail_err, 1e-12, "max |K - (-log r / 2pi)| on [4 eps, 64 eps]"));

  double core = 0.0;
  double core_grad = 0.0;
  for (int k = 0; k <= kSamples; ++k) {
    const double r = eps * k / kSamples;
    core = std::max(core, std::abs(kernel_value(prof, {r * 0.6, r * 0.8})));
    core_grad = std::max(core_grad, std::abs(kernel_radial_derivative(prof, r)));
  }
  rep.properties.push_back(at_most("zero_core", core, 0.0, fmt::format("max |K| on |z| <= eps (eps = {})", eps)));
  rep.properties.push_back(at_most("flat_core", core_grad, 0.0, "max |dK/dr| on |z| <= eps"));

  double worst_slope = -std::numeric_limits<double>::infinity();
  double worst_step = -std::numeric_limits<double>::infinity();
  double cg = 0.0;
  double above_log = -std::numeric_limits<double>::infinity();
  double prev = kernel_value(prof, {eps, 0.0});
  for (int k = 1; k <= kSamples; ++k) {
    const double r = eps * (1.0 + 3.0 * k / kSamples);
    const double val = kernel_value(prof, {r, 0.0});
    worst_slope = std::max(worst_slope, kernel_radial_derivative(prof, r));
    worst_step = std::max(worst_step, val - prev);
    prev = val;
    cg = std::max(cg, 2.0 * kPi * r * std::abs(kernel_radial_derivative(prof, r)));
    above_log = std::max(above_log, val - log_tail(r));
  }
  rep.properties.push_back(at_most("radial_monotone", std::max(worst_slope, worst_step), 0.0,
                                   "largest radial slope / difference on [eps, 4 eps] (must be <= 0)"));
  rep.properties.push_back(at_most("gradient_constant", cg, 1.1, "measured C_g = sup 2 pi |z| |grad K|"));
  rep.properties.push_back(at_most("pointwise_log_bound", above_log, 1e-12,
                                   "max (K - (-log |z| / 2pi)) on |z| >= eps"));

  // Table properties.
  const Grid grid{opt.table_cells, opt.table_cells, opt.table_half_width};
  const KernelTable table = KernelTable::build(prof, grid);
  const double h = grid.spacing();
  const long n = static_cast<long>(grid.nx);
  double formula_err = 0.0;
  double sym_err = 0.0;
  double sh_violation = -std::numeric_limits<double>::infinity();
  const double delta = superharmonic_defect(prof);
  for (long dj = -(n - 1); dj <= n - 1; ++dj) {
    for (long di = -(n - 1); di <= n - 1; ++di) {
      const Vec2 z{static_cast<double>(di) * h, static_cast<double>(dj) * h};
      formula_err = std::max(formula_err, std::abs(table.value_at(di, dj) - kernel_value(prof, z)));
      const Vec2 g = table.gradient_at(di, dj);
      const Vec2 gm = table.gradient_at(-di, -dj);
      sym_err = std::max({sym_err, std::abs(table.value_at(di, dj) - table.value_at(-di, -dj)),
                          std::abs(g.x + gm.x), std::abs(g.y + gm.y)});
      const double r = std::hypot(z.x, z.y);
      if (r > eps + 2.0 * h) {
        auto lap = [&](double s) {
          return (kernel_value(prof, {z.x + s, z.y}) + kernel_value(prof, {z.x - s, z.y}) +
                  kernel_value(prof, {z.x, z.y + s}) + kernel_value(prof, {z.x, z.y - s}) -
                  4.0 * kernel_value(prof, z)) / (s * s);
        };
        const double lh = lap(h);
        const double tau = std::abs(lh - lap(0.5 * h)) * 4.0 / 3.0;
        sh_violation = std::max(sh_violation, lh - (delta + tau));
      }
    }
  }
  rep.properties.push_back(at_most("table_matches_formula", formula_err, 0.0));
  rep.properties.push_back(at_most("table_symmetry", sym_err, 0.0, "K even, grad K odd under z -> -z"));
  rep.properties.push_back(at_most("discrete_superharmonic", sh_violation, 0.0,
                                   fmt::format("-Lap_h K >= -(delta + tau), delta = {:.6g}", delta)));

  const KernelTable again = KernelTable::build(prof, grid);
  const bool same = std::equal(table.values().begin(), table.values().end(), again.values().begin()) &&
                    std::equal(table.grad_x().begin(), table.grad_x().end(), again.grad_x().begin()) &&
                    std::equal(table.grad_y().begin(), table.grad_y().end(), again.grad_y().begin());
  rep.properties.push_back(holds("table_rebuild_bitwise", same));

  // Convolution against the direct sum on a small grid, and linearity.
  {
    const Grid small{24, 24, 3.0};
    KernelProfile p2 = prof;
    p2.epsilon = 2.0 * small.spacing();
    const KernelTable t2 = KernelTable::build(p2, small);
    Field a(small);
    Field b(small);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (auto& v : a.values) v = U(rng);
    for (auto& v : b.values) v = U(rng);
    const ChemoField c = chemo_field(t2, a, b);
    const double hs = small.spacing();
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < small.ny; ++j) {
      for (std::size_t i = 0; i < small.nx; ++i) {
        double v = 0.0;
        double gx = 0.0;
        double gy = 0.0;
        for (std::size_t q = 0; q < small.ny; ++q) {
          for (std::size_t p = 0; p < small.nx; ++p) {
            const double rho = (a.at(p, q) + b.at(p, q)) * hs * hs;
            const Vec2 z{(static_cast<double>(i) - static_cast<double>(p)) * hs,
                         (static_cast<double>(j) - static_cast<double>(q)) * hs};
            v += kernel_value(p2, z) * rho;
            const Vec2 g = kernel_gradient(p2, z);
            gx += g.x * rho;
            gy += g.y * rho;
          }
        }
        err = std::max({err, std::abs(v - c.v.at(i, j)), std::abs(gx - c.grad_x.at(i, j)),
                        std::abs(gy - c.grad_y.at(i, j))});
        scale = std::max({scale, std::abs(v), std::hypot(gx, gy)});
      }
    }
    rep.properties.push_back(at_most("convolution_matches_direct_sum", err / scale, 1e-12, "24x24 grid, relative"));

    Field a3(small);
    Field zero(small);
    for (std::size_t k = 0; k < a.values.size(); ++k) a3.values[k] = 3.0 * (a.values[k] + b.values[k]);
    const ChemoField c3 = chemo_field(t2, a3, zero);
    double lin = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
      lin = std::max({lin, std::abs(c3.v.values[k] - 3.0 * c.v.values[k]),
                      std::abs(c3.grad_x.values[k] - 3.0 * c.grad_x.values[k]),
                      std::abs(c3.grad_y.values[k] - 3.0 * c.grad_y.values[k])});
    }
    rep.properties.push_back(at_most("chemo_field_linear", lin / (3.0 * scale), 1e-12));
  }

  // Velocity of a radial Gaussian against -M (1 - exp(-r^2 / 2 sigma^2)) / (2 pi r).
  {
    const Grid g{opt.gaussian_cells, opt.gaussian_cells, opt.gaussian_half_width};
    KernelProfile p3 = prof;
    p3.epsilon = 2.0 * g.spacing();
    const KernelTable t3 = KernelTable::build(p3, g);
    const double M = 2.0 * kPi;
    const double sig = opt.gaussian_sigma;
    Field rho(g);
    for (std::size_t j = 0; j < g.ny; ++j) {
      for (std::size_t i = 0; i < g.nx; ++i) {
        const double r2 = g.x(i) * g.x(i) + g.y(j) * g.y(j);
        rho.at(i, j) = M / (2.0 * kPi * sig * sig) * std::exp(-r2 / (2.0 * sig * sig));
      }
    }
    Field gx(g);
    Field gy(g);
    chemo_gradient(t3, rho, gx, gy);
    double worst = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j) {
      for (std::size_t i = 0; i < g.nx; ++i) {
        const double x = g.x(i);
        const double y = g.y(j);
        const double r = std::hypot(x, y);
        if (!(r > 4.0 * p3.epsilon && r < 0.5 * g.half_width)) continue;
        const double exact = -M * (1.0 - std::exp(-r * r / (2.0 * sig * sig))) / (2.0 * kPi * r);
        const double radial = (gx.at(i, j) * x + gy.at(i, j) * y) / r;
        worst = std::max(worst, std::abs(radial - exact) / std::abs(exact));
      }
    }
    rep.properties.push_back(at_most("gaussian_velocity", worst, 0.01,
                                     fmt::format("max relative error of the radial velocity, {}^2 grid, L = {}, sigma = {}",
                                                 g.nx, g.half_width, sig)));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// HLS

namespace {

using hls::IndexSubset;
using hls::InteractionMatrix;

}  // namespace

CheckReport check_hls(const HlsCheckOptions& opt) {
  CheckReport rep{"hls", {}};
  const double pi = kPi;
  const InteractionMatrix one(1, {1.0});
  const InteractionMatrix off(2, {0.0, 1.0, 1.0, 0.0});
  const InteractionMatrix diag(2, {1.0, 0.0, 0.0, 1.0});
  const std::vector<double> m8{8.0 * pi};
  const std::vector<double> m4{4.0 * pi};
  const std::vector<double> m88{8.0 * pi, 8.0 * pi};

  rep.properties.push_back(holds("bounded_below_single_critical", hls::check_bounded_below(one, m8)));
  rep.properties.push_back(holds("bounded_below_single_subcritical_false", !hls::check_bounded_below(one, m4)));
  rep.properties.push_back(holds("bounded_below_offdiagonal", hls::check_bounded_below(off, m88)));
  rep.properties.push_back(holds("minimizer_single_critical", hls::check_minimizer_exists(one, m8)));
  rep.properties.push_back(holds("minimizer_offdiagonal", hls::check_minimizer_exists(off, m88)));
  rep.properties.push_back(holds("minimizer_diagonal_false", !hls::check_minimizer_exists(diag, m88)));

  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<int> pick_n(1, 4);
  std::uniform_int_distribution<int> pick_entry(0, 3);
  std::uniform_real_distribution<double> U(0.1, 2.0);
  std::size_t implication_failures = 0;
  std::size_t minimizers = 0;
  std::size_t bounded = 0;
  double perm_err = 0.0;
  for (std::size_t s = 0; s < opt.samples; ++s) {
    const std::size_t n = static_cast<std::size_t>(pick_n(rng));
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        // small integers make exact ties between subsets likely
        const double v = s % 2 == 0 ? static_cast<double>(pick_entry(rng)) : U(rng);
        a[i * n + j] = v;
        a[j * n + i] = v;
      }
    }
    std::vector<double> m(n);
    for (auto& v : m) v = s % 2 == 0 ? static_cast<double>(1 + pick_entry(rng) % 2) : U(rng);
    InteractionMatrix A(n, a);
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lin += m[i];
      for (std::size_t j = 0; j < n; ++j) quad += a[i * n + j] * m[i] * m[j];
    }
    if (quad > 0.0) {
      const double t = 8.0 * pi * lin / quad;  // Lambda_I(t m) = 0
      for (auto& v : m) v *= t;
    }
    const bool mini = hls::check_minimizer_exists(A, m);
    const bool bnd = hls::check_bounded_below(A, m);
    minimizers += mini;
    bounded += bnd;
    if (mini && !bnd) ++implication_failures;

    // Reverse the index order.
    std::vector<double> ar(n * n);
    std::vector<double> mr(n);
    for (std::size_t i = 0; i < n; ++i) {
      mr[i] = m[n - 1 - i];
      for (std::size_t j = 0; j < n; ++j) ar[i * n + j] = a[(n - 1 - i) * n + (n - 1 - j)];
    }
    const InteractionMatrix Ar(n, ar);
    for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
      std::uint32_t rbits = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if ((bits >> i) & 1u) rbits |= 1u << (n - 1 - i);
      }
      const double l1 = hls::lambda_J(A, m, IndexSubset(bits));
      const double l2 = hls::lambda_J(Ar, mr, IndexSubset(rbits));
      perm_err = std::max(perm_err, std::abs(l1 - l2) / (1.0 + std::abs(l1)));
    }
  }
  rep.properties.push_back(at_most("minimizer_implies_bounded", static_cast<double>(implication_failures), 0.0,
                                   fmt::format("{} samples, {} with a minimizer, {} bounded below", opt.samples,
                                               minimizers, bounded)));
  rep.properties.push_back(at_most("lambda_permutation_invariant", perm_err, 1e-12));

  // Auxiliary parameters against the classifier.
  std::uniform_real_distribution<double> logu(std::log(0.2), std::log(5.0));
  std::uniform_real_distribution<double> frac(0.0, 1.5);
  std::size_t disagreements = 0;
  double h_residual = 0.0;
  double min_coeff = std::numeric_limits<double>::infinity();
  std::size_t found = 0;
  const std::size_t aux_samples = std::max<std::size_t>(opt.samples / 10, 1);
  for (std::size_t s = 0; s < aux_samples; ++s) {
    const Parameters p{std::exp(logu(rng)), std::exp(logu(rng)), std::exp(logu(rng))};
    const MassPair m{frac(rng) * species1_threshold(p), frac(rng) * species2_threshold(p)};
    if (m.total() <= 0.0) continue;
    const auto aux = hls::find_admissible_params(m, p);
    const bool global = classify(m, p, 1e-12) == RegionLabel::GlobalExistence;
    const bool boundary = classify(m, p, 1e-9) == RegionLabel::Boundary;
    if (aux.has_value() != global && !boundary) ++disagreements;
    if (aux) {
      ++found;
      const double lhs = 8.0 * pi * (p.mu * m.theta1 / aux->a + m.theta2 / aux->b);
      const double rhs = m.total() * m.total();
      h_residual = std::max(h_residual, std::abs(lhs - rhs) / std::max(lhs, rhs));
      const auto c = hls::entropy_coefficients(p, *aux);
      min_coeff = std::min({min_coeff, c[0], c[1]});
      if (!(aux->a > p.chi1 && aux->b > p.chi2)) ++disagreements;
    }
  }
  rep.properties.push_back(at_most("admissible_iff_global_existence", static_cast<double>(disagreements), 0.0,
                                   fmt::format("{} samples, {} admissible", aux_samples, found)));
  rep.properties.push_back(at_most("admissible_meets_H", h_residual, 1e-12));
  rep.properties.push_back(holds("entropy_coefficients_positive", found == 0 || min_coeff > 0.0,
                                 fmt::format("smallest coefficient {:.6g}", min_coeff)));
  return rep;
}

// ---------------------------------------------------------------------------
// Conservation

CheckReport check_conservation(const ConservationCheckOptions& opt) {
  CheckReport rep{"conservation", {}};
  const Grid g{opt.cells, opt.cells, opt.half_width};
  g.validate();
  const Parameters p{1.5, 1.0, 0.8};
  SolverConfig cfg;
  cfg.epsilon = 2.0 * g.spacing();
  cfg.horizon = std::numeric_limits<double>::max();

  InitialData init;
  init.grid = g;
  init.species1 = {{kPi, 0.5, 0.3, -0.2}};
  init.species2 = {{1.5 * kPi, 0.6, -0.25, 0.1}, {0.5 * kPi, 0.4, 0.5, 0.5}};
  State s = make_initial_state(init);
  const KernelTable table = KernelTable::build(KernelProfile{cfg.epsilon, {}}, g);

  double drift1 = 0.0;
  double drift2 = 0.0;
  double min_density = std::numeric_limits<double>::infinity();
  double m1 = total_mass(s.u1);
  double m2 = total_mass(s.u2);
  std::uint64_t taken = 0;
  std::string stop;
  double leak = 0.0;
  for (; taken < opt.steps; ++taken) {
    StepResult r = step(s, cfg, table, p);
    // The outer faces carry no flux, so a leak signal does not affect the
    // discrete balance measured here.
    if (r.status == StepStatus::BlowupDetected) {
      stop = r.detail;
      break;
    }
    s = std::move(r.state);
    leak = std::max(leak, boundary_mass_fraction(s));
    const double n1 = total_mass(s.u1);
    const double n2 = total_mass(s.u2);
    drift1 = std::max(drift1, std::abs(n1 - m1) / m1);
    drift2 = std::max(drift2, std::abs(n2 - m2) / m2);
    m1 = n1;
    m2 = n2;
    for (const Field* f : {&s.u1, &s.u2}) {
      for (double v : f->values) min_density = std::min(min_density, v);
    }
  }
  const std::string detail =
      fmt::format("{}^2 grid, {} steps to t = {:.6g}, boundary mass fraction up to {:.3g}", g.nx, taken, s.t, leak);
  rep.properties.push_back(holds("steps_completed", taken == opt.steps, stop.empty() ? detail : stop));
  rep.properties.push_back(at_most("mass1_drift_per_step", drift1, 1e-13, detail));
  rep.properties.push_back(at_most("mass2_drift_per_step", drift2, 1e-13, detail));
  rep.properties.push_back(at_most("negative_density", -min_density, 0.0, "minus the smallest density seen"));

  // Identical species stay bitwise identical.
  {
    const Parameters q{1.0, 1.2, 1.2};
    InitialData same;
    same.grid = g;
    same.species1 = {{kPi, 0.5, 0.2, 0.1}};
    same.species2 = same.species1;
    State t = make_initial_state(same);
    const std::uint64_t sym_steps = std::min<std::uint64_t>(opt.steps, 200);
    bool equal = true;
    for (std::uint64_t k = 0; k < sym_steps && equal; ++k) {
      StepResult r = step(t, cfg, table, q);
      t = std::move(r.state);
      equal = t.u1.values == t.u2.values;
    }
    rep.properties.push_back(holds("identical_species_bitwise", equal, fmt::format("{} steps", sym_steps)));
  }
  return rep;
}

CheckReport run_check(std::string_view kind) {
  if (kind == "kernel") return check_kernel();
  if (kind == "hls") return check_hls();
  if (kind == "conservation") return check_conservation();
  throw std::invalid_argument(fmt::format("unknown check '{}' (expected kernel, hls or conservation)", kind));
}

}  // namespace ks2
