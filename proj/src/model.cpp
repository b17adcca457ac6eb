#include "ks2/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace ks2 {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

bool is_zero(double value, double scale, double tol) {
  return std::abs(value) <= tol * (1.0 + std::abs(scale));
}

}  // namespace

void Parameters::validate() const {
  if (!positive_finite(mu) || !positive_finite(chi1) || !positive_finite(chi2)) {
    throw std::invalid_argument(
        fmt::format("parameters must be positive: mu={} chi1={} chi2={}", mu, chi1, chi2));
  }
}

void MassPair::validate() const {
  if (!(std::isfinite(theta1) && theta1 >= 0.0) || !(std::isfinite(theta2) && theta2 >= 0.0)) {
    throw std::invalid_argument(
        fmt::format("masses must be nonnegative: theta1={} theta2={}", theta1, theta2));
  }
}

std::string_view to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::GlobalExistence: return "GlobalExistence";
    case RegionLabel::BlowupRadial: return "BlowupRadial";
    case RegionLabel::BlowupGeneral: return "BlowupGeneral";
    case RegionLabel::Boundary: return "Boundary";
  }
  return "?";
}

std::optional<RegionLabel> parse_region_label(std::string_view text) {
  for (auto label : {RegionLabel::GlobalExistence, RegionLabel::BlowupRadial,
                     RegionLabel::BlowupGeneral, RegionLabel::Boundary}) {
    if (to_string(label) == text) return label;
  }
  return std::nullopt;
}

double parabola_value(const MassPair& m, const Parameters& p) {
  const double s = m.total();
  return 8.0 * kPi * (p.mu * m.theta1 / p.chi1 + m.theta2 / p.chi2) - s * s;
}

double species1_threshold(const Parameters& p) { return 8.0 * kPi * p.mu / p.chi1; }
double species2_threshold(const Parameters& p) { return 8.0 * kPi / p.chi2; }

RegionMargins region_margins(const MassPair& m, const Parameters& p) {
  RegionMargins r;
  const double s = m.total();
  const double a = 8.0 * kPi * p.mu * m.theta1 / p.chi1;
  const double b = 8.0 * kPi * m.theta2 / p.chi2;
  r.parabola = parabola_value(m, p);
  r.parabola_scale = std::max({a, b, s * s});
  const double t1 = species1_threshold(p);
  const double t2 = species2_threshold(p);
  r.line1 = t1 - m.theta1;
  r.line1_scale = std::max(t1, m.theta1);
  r.line2 = t2 - m.theta2;
  r.line2_scale = std::max(t2, m.theta2);
  return r;
}

RegionLabel classify(const MassPair& m, const Parameters& p, double tol) {
  const RegionMargins r = region_margins(m, p);
  if (is_zero(r.parabola, r.parabola_scale, tol) || is_zero(r.line1, r.line1_scale, tol) ||
      is_zero(r.line2, r.line2_scale, tol)) {
    return RegionLabel::Boundary;
  }
  if (r.line1 < 0.0 || r.line2 < 0.0) return RegionLabel::BlowupGeneral;
  if (r.parabola > 0.0) return RegionLabel::GlobalExistence;
  return RegionLabel::BlowupRadial;
}

bool intersects_lines(const Parameters& p) {
  return p.chi1 < p.mu * p.chi2 / 2.0 || p.chi1 > 2.0 * p.mu * p.chi2;
}

std::pair<MassPair, Parameters> swap_species(const MassPair& m, const Parameters& p) {
  return {MassPair{m.theta2, m.theta1},
          Parameters{1.0 / p.mu, p.chi2 / p.mu, p.chi1 / p.mu}};
}

double moment_rate(const MassPair& m, const Parameters& p) {
  const double s = m.total();
  return 4.0 * m.theta1 * p.mu / p.chi1 + 4.0 * m.theta2 / p.chi2 - s * s / (2.0 * kPi);
}

std::optional<double> predict_blowup_deadline(double m0, double rate) {
  if (m0 < 0.0) throw std::invalid_argument("second moment must be nonnegative");
  if (rate < 0.0) return m0 / (-rate);
  return std::nullopt;
}

}  // namespace ks2
