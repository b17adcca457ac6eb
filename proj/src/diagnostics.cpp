#include "ks2/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace ks2 {

namespace {

double u_log_u(double u) { return u > kDensityFloor ? u * std::log(u) : 0.0; }

void require_same_grid(const State& s) {
  if (!(s.u1.grid == s.u2.grid)) throw std::invalid_argument("u1 and u2 live on different grids");
}

// h^2 * sum_k f(k) in pairwise order.
template <typename F>
double integrate(const Grid& g, F&& f) {
  std::vector<double> terms(g.cells());
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) terms[j * g.nx + i] = f(i, j);
  }
  return pairwise_sum(terms) * g.cell_area();
}

double radius2(const Grid& g, std::size_t i, std::size_t j) {
  const double x = g.x(i);
  const double y = g.y(j);
  return x * x + y * y;
}

}  // namespace

bool DiagnosticsRecord::finite() const {
  for (double v : diagnostics_values(*this)) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

const std::vector<std::string_view>& diagnostics_columns() {
  static const std::vector<std::string_view> columns = {
      "t",           "mass1",         "mass2",      "weighted_moment", "total_moment",
      "entropy1",    "entropy2",      "mixed_entropy", "free_energy", "dissipation",
      "max_u1",      "max_u2",        "boundary_mass_fraction", "dt"};
  return columns;
}

std::array<double, 14> diagnostics_values(const DiagnosticsRecord& r) {
  return {r.t,           r.mass1,       r.mass2,  r.weighted_moment, r.total_moment,
          r.entropy1,    r.entropy2,    r.mixed_entropy, r.free_energy, r.dissipation,
          r.max_u1,      r.max_u2,      r.boundary_mass_fraction, r.dt};
}

nlohmann::ordered_json to_json(const DiagnosticsRecord& r) {
  nlohmann::ordered_json j;
  const auto values = diagnostics_values(r);
  const auto& names = diagnostics_columns();
  for (std::size_t k = 0; k < names.size(); ++k) j[std::string(names[k])] = values[k];
  return j;
}

double total_mass(const Field& u) { return pairwise_sum(u.span()) * u.grid.cell_area(); }

double entropy(const Field& u) {
  return integrate(u.grid, [&](std::size_t i, std::size_t j) { return u_log_u(u.at(i, j)); });
}

double second_moment(const Field& u) {
  const Grid& g = u.grid;
  return integrate(g, [&](std::size_t i, std::size_t j) { return u.at(i, j) * radius2(g, i, j); });
}

double weighted_moment(const State& s, const Parameters& p) {
  require_same_grid(s);
  const Grid& g = s.grid();
  const double w1 = p.mu / p.chi1;
  const double w2 = 1.0 / p.chi2;
  return integrate(g, [&](std::size_t i, std::size_t j) {
    return (w1 * s.u1.at(i, j) + w2 * s.u2.at(i, j)) * radius2(g, i, j);
  });
}

double total_moment(const State& s, const Parameters& p) {
  require_same_grid(s);
  const Grid& g = s.grid();
  const double w1 = kPi / p.chi1;
  const double w2 = kPi / p.chi2;
  return integrate(g, [&](std::size_t i, std::size_t j) {
    return (w1 * s.u1.at(i, j) + w2 * s.u2.at(i, j)) * radius2(g, i, j);
  });
}

double mixed_entropy(const State& s, const Parameters& p) {
  require_same_grid(s);
  return integrate(s.grid(), [&](std::size_t i, std::size_t j) {
    return u_log_u(s.u1.at(i, j) / p.chi1 + s.u2.at(i, j) / p.chi2);
  });
}

double free_energy(const State& s, const Field& v, const Parameters& p) {
  require_same_grid(s);
  if (!(v.grid == s.grid())) throw std::invalid_argument("v lives on a different grid");
  const double c1 = p.mu / p.chi1;
  const double c2 = 1.0 / p.chi2;
  return integrate(s.grid(), [&](std::size_t i, std::size_t j) {
    const double a = s.u1.at(i, j);
    const double b = s.u2.at(i, j);
    return c1 * u_log_u(a) + c2 * u_log_u(b) - 0.5 * (a + b) * v.at(i, j);
  });
}

namespace {

// Centred difference of log u along one axis; one-sided at the edges. Returns
// false when any density in the stencil is at or below the floor.
bool log_derivative(const Field& u, std::size_t i, std::size_t j, bool along_x, double h, double& out) {
  const std::size_t n = along_x ? u.grid.nx : u.grid.ny;
  const std::size_t k = along_x ? i : j;
  auto sample = [&](std::size_t m) { return along_x ? u.at(m, j) : u.at(i, m); };
  const std::size_t lo = k == 0 ? 0 : k - 1;
  const std::size_t hi = k + 1 == n ? k : k + 1;
  const double a = sample(lo);
  const double b = sample(hi);
  if (!(a > kDensityFloor && b > kDensityFloor)) return false;
  out = (std::log(b) - std::log(a)) / (static_cast<double>(hi - lo) * h);
  return true;
}

}  // namespace

Dissipation dissipation(const State& s, const ChemoField& chemo, const Parameters& p) {
  require_same_grid(s);
  const Grid& g = s.grid();
  if (!(chemo.grad_x.grid == g && chemo.grad_y.grid == g)) {
    throw std::invalid_argument("chemo field lives on a different grid");
  }
  const double h = g.spacing();
  std::vector<double> terms(g.cells(), 0.0);
  std::vector<double> excluded(g.cells(), 0.0);

  auto accumulate = [&](const Field& u, double diffusivity, double chi) {
    for (std::size_t j = 0; j < g.ny; ++j) {
      for (std::size_t i = 0; i < g.nx; ++i) {
        const double c = u.at(i, j);
        if (c == 0.0) continue;
        double dx = 0.0;
        double dy = 0.0;
        if (!(c > kDensityFloor) || !log_derivative(u, i, j, true, h, dx) || !log_derivative(u, i, j, false, h, dy)) {
          excluded[j * g.nx + i] += c;
          continue;
        }
        const double fx = diffusivity * dx - chi * chemo.grad_x.at(i, j);
        const double fy = diffusivity * dy - chi * chemo.grad_y.at(i, j);
        terms[j * g.nx + i] += c * (fx * fx + fy * fy) / chi;
      }
    }
  };
  accumulate(s.u1, p.mu, p.chi1);
  accumulate(s.u2, 1.0, p.chi2);

  Dissipation d;
  d.value = pairwise_sum(terms) * g.cell_area();
  const double mass = total_mass(s.u1) + total_mass(s.u2);
  if (mass > 0.0) d.excluded_mass_fraction = pairwise_sum(excluded) * g.cell_area() / mass;
  return d;
}

double entropy_lower_bound(double t, const Parameters& p, const MassPair& m) {
  if (!(t >= 0.0)) throw std::invalid_argument(fmt::format("entropy_lower_bound needs t >= 0, got {}", t));
  const double M = p.mu / p.chi1 * m.theta1 + m.theta2 / p.chi2;
  if (M <= 0.0) return 0.0;
  return M * std::log(M) - M * std::log(kPi * (1.0 + t));
}

double boundary_mass_fraction(const State& s, std::size_t width) {
  require_same_grid(s);
  const Grid& g = s.grid();
  const double total = total_mass(s.u1) + total_mass(s.u2);
  if (!(total > 0.0)) return 0.0;
  const double strip = integrate(g, [&](std::size_t i, std::size_t j) {
    const bool edge = i < width || j < width || i + width >= g.nx || j + width >= g.ny;
    return edge ? s.u1.at(i, j) + s.u2.at(i, j) : 0.0;
  });
  return strip / total;
}

DiagnosticsRecord make_record(const State& s, const ChemoField& chemo, const Parameters& p, double dt) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.mass1 = total_mass(s.u1);
  r.mass2 = total_mass(s.u2);
  r.weighted_moment = weighted_moment(s, p);
  r.total_moment = total_moment(s, p);
  r.entropy1 = entropy(s.u1);
  r.entropy2 = entropy(s.u2);
  r.mixed_entropy = mixed_entropy(s, p);
  r.free_energy = free_energy(s, chemo.v, p);
  const Dissipation d = dissipation(s, chemo, p);
  r.dissipation = d.value;
  r.dissipation_excluded_fraction = d.excluded_mass_fraction;
  r.max_u1 = max_value(s.u1.span());
  r.max_u2 = max_value(s.u2.span());
  r.boundary_mass_fraction = boundary_mass_fraction(s);
  r.dt = dt;
  r.second_moment1 = second_moment(s.u1);
  r.second_moment2 = second_moment(s.u2);
  return r;
}

void DiagnosticsEmitter::emit(const DiagnosticsRecord& r) {
  const auto values = diagnostics_values(r);
  const auto& names = diagnostics_columns();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      throw DiagnosticsError(fmt::format("non-finite diagnostics value {}={} at t={}", names[k], values[k], r.t));
    }
  }
  std::string line;
  if (format_ == EmitFormat::Csv) {
    if (rows_ == 0) line = fmt::format("{}\n", fmt::join(names, ","));
    line += fmt::format("{:.17g}\n", fmt::join(values, ","));
  } else {
    line = to_json(r).dump() + "\n";
  }
  out_ << line;
  out_.flush();
  if (!out_) throw std::ios_base::failure("failed to write diagnostics record");
  ++rows_;
}

std::vector<DiagnosticsRecord> parse_diagnostics_csv(std::string_view text) {
  std::vector<DiagnosticsRecord> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const auto& names = diagnostics_columns();
    if (cells.size() != names.size()) {
      throw DiagnosticsError(fmt::format("line {}: expected {} columns, got {}", line_no, names.size(), cells.size()));
    }
    if (!header_seen) {
      for (std::size_t k = 0; k < names.size(); ++k) {
        if (cells[k] != names[k]) {
          throw DiagnosticsError(fmt::format("line {}: header column {} is '{}', expected '{}'", line_no, k, cells[k], names[k]));
        }
      }
      header_seen = true;
      continue;
    }
    std::array<double, 14> v{};
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto* first = cells[k].data();
      const auto* last = first + cells[k].size();
      const auto [ptr, ec] = std::from_chars(first, last, v[k]);
      if (ec != std::errc{} || ptr != last) {
        throw DiagnosticsError(fmt::format("line {}: cannot parse '{}' as a number", line_no, cells[k]));
      }
    }
    DiagnosticsRecord r;
    r.t = v[0];
    r.mass1 = v[1];
    r.mass2 = v[2];
    r.weighted_moment = v[3];
    r.total_moment = v[4];
    r.entropy1 = v[5];
    r.entropy2 = v[6];
    r.mixed_entropy = v[7];
    r.free_energy = v[8];
    r.dissipation = v[9];
    r.max_u1 = v[10];
    r.max_u2 = v[11];
    r.boundary_mass_fraction = v[12];
    r.dt = v[13];
    out.push_back(r);
  }
  if (!header_seen) throw DiagnosticsError("diagnostics CSV has no header");
  return out;
}

// ---------------------------------------------------------------------------

bool BoundReport::any_violation() const {
  for (const auto& f : flags) {
    if (f.violated) return true;
  }
  return false;
}

nlohmann::ordered_json to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["entropy_lower"] = r.entropy_lower;
  if (r.te_coefficients) {
    j["te_coefficients"] = {(*r.te_coefficients)[0], (*r.te_coefficients)[1]};
  } else {
    j["te_coefficients"] = nullptr;
  }
  j["moment_prediction"] = r.moment_prediction;
  auto flags = nlohmann::ordered_json::array();
  for (const auto& f : r.flags) {
    flags.push_back({{"name", f.name}, {"violated", f.violated}, {"worst_margin", f.worst_margin}, {"tolerance", f.tolerance}});
  }
  j["flags"] = flags;
  j["any_violation"] = r.any_violation();
  return j;
}

BoundMonitor::BoundMonitor(const Parameters& p, const MassPair& masses)
    : params_(p), masses_(masses), rate_(moment_rate(masses, p)) {
  p.validate();
  masses.validate();
}

BoundFlag& BoundMonitor::flag(std::string_view name, double tolerance) {
  for (auto& f : flags_) {
    if (f.name == name) return f;
  }
  flags_.push_back(BoundFlag{std::string(name), false, 0.0, tolerance});
  return flags_.back();
}

void BoundMonitor::check(std::string_view name, double margin, double tolerance) {
  BoundFlag& f = flag(name, tolerance);
  if (margin < f.worst_margin) f.worst_margin = margin;
  if (margin < -tolerance) f.violated = true;
}

namespace {

// m log m - m log(pi (1 + t)) - int u |x|^2 / (1 + t): Jensen's inequality
// against the Gaussian exp(-|x|^2 / (1 + t)) / (pi (1 + t)).
double explicit_entropy_bound(double mass, double moment, double t) {
  if (!(mass > 0.0)) return 0.0;
  return mass * std::log(mass) - mass * std::log(kPi * (1.0 + t)) - moment / (1.0 + t);
}

}  // namespace

void BoundMonitor::observe(const DiagnosticsRecord& r) {
  if (!first_) first_ = r;
  const DiagnosticsRecord& r0 = *first_;

  const double m0 = r0.mass1 + r0.mass2;
  check("mass_conservation", 1e-8 - std::abs(r.mass1 + r.mass2 - m0) / std::max(m0, 1e-300), 0.0);

  if (last_) {
    const double allowance = 1e-6 * (1.0 + std::abs(last_->free_energy));
    check("free_energy_monotone", last_->free_energy + allowance - r.free_energy, 0.0);
  }

  const double elapsed = r.t - r0.t;
  const double predicted = r0.weighted_moment + rate_ * elapsed;
  const double scale = std::abs(r0.weighted_moment) + std::abs(rate_) * elapsed;
  check("moment_identity", 0.03 * scale - std::abs(r.weighted_moment - predicted), 1e-12 * (1.0 + scale));

  const double b1 = explicit_entropy_bound(r.mass1, r.second_moment1, r.t);
  const double b2 = explicit_entropy_bound(r.mass2, r.second_moment2, r.t);
  check("entropy1_lower_bound", r.entropy1 - b1, 1e-9 * (1.0 + std::abs(r.entropy1)));
  check("entropy2_lower_bound", r.entropy2 - b2, 1e-9 * (1.0 + std::abs(r.entropy2)));

  last_ = r;
}

BoundReport BoundMonitor::report() const {
  BoundReport rep;
  rep.flags = flags_;
  const double t = last_ ? last_->t : 0.0;
  rep.entropy_lower = entropy_lower_bound(t, params_, masses_);
  rep.moment_prediction = first_ ? first_->weighted_moment + rate_ * (t - first_->t) : 0.0;
  if (classify(masses_, params_, 1e-12) == RegionLabel::GlobalExistence) {
    const auto ab = hls::find_admissible_params(masses_, params_);
    if (ab) {
      rep.te_coefficients = std::array<double, 2>{params_.mu * (1.0 / params_.chi1 - 1.0 / ab->a),
                                                  1.0 / params_.chi2 - 1.0 / ab->b};
    }
  }
  return rep;
}

}  // namespace ks2
