#include "ks2/hls.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace ks2::hls {

namespace {

struct Lambda {
  double value = 0.0;
  double scale = 0.0;

  bool zero() const { return std::abs(value) <= kRelTol * scale; }
  bool nonnegative() const { return value >= -kRelTol * scale; }
  bool positive() const { return value > kRelTol * scale; }
};

Lambda lambda_with_scale(const InteractionMatrix& a, std::span<const double> m, IndexSubset J) {
  double linear = 0.0;
  double quadratic = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!J.contains(i)) continue;
    linear += m[i];
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (J.contains(j)) quadratic += a(i, j) * m[i] * m[j];
    }
  }
  linear *= 8.0 * kPi;
  return {linear - quadratic, std::max(linear, quadratic)};
}

// Zero masses carry no component of Gamma_M; drop them.
struct Reduced {
  InteractionMatrix a;
  std::vector<double> m;
};

Reduced drop_empty_species(const InteractionMatrix& a, std::span<const double> masses) {
  if (masses.size() != a.size()) {
    throw std::invalid_argument(
        fmt::format("mass vector has {} entries, matrix is {}x{}", masses.size(), a.size(), a.size()));
  }
  std::vector<std::size_t> keep;
  std::vector<double> m;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(std::isfinite(masses[i]) && masses[i] >= 0.0)) {
      throw std::invalid_argument(fmt::format("mass {} is not a nonnegative number", i));
    }
    if (masses[i] > 0.0) {
      keep.push_back(i);
      m.push_back(masses[i]);
    }
  }
  return {a.restricted(keep), std::move(m)};
}

}  // namespace

InteractionMatrix::InteractionMatrix(std::size_t n, std::vector<double> entries)
    : n_(n), a_(std::move(entries)) {
  if (n_ > 31) throw std::invalid_argument("at most 31 species are supported");
  if (a_.size() != n_ * n_) {
    throw std::invalid_argument(fmt::format("expected {} entries, got {}", n_ * n_, a_.size()));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = (*this)(i, j);
      if (!(std::isfinite(v) && v >= 0.0)) {
        throw std::invalid_argument(fmt::format("a[{}][{}] = {} must be nonnegative", i, j, v));
      }
      if (v != (*this)(j, i)) {
        throw std::invalid_argument(fmt::format("matrix is not symmetric at ({}, {})", i, j));
      }
    }
  }
}

InteractionMatrix InteractionMatrix::restricted(std::span<const std::size_t> keep) const {
  std::vector<double> sub;
  sub.reserve(keep.size() * keep.size());
  for (std::size_t i : keep) {
    for (std::size_t j : keep) sub.push_back((*this)(i, j));
  }
  return InteractionMatrix(keep.size(), std::move(sub));
}

IndexSubset IndexSubset::of(std::initializer_list<std::size_t> idx) {
  std::uint32_t bits = 0;
  for (auto i : idx) bits |= 1u << i;
  return IndexSubset(bits);
}

double lambda_J(const InteractionMatrix& a, std::span<const double> masses, IndexSubset subset) {
  if (masses.size() != a.size()) throw std::invalid_argument("mass vector / matrix size mismatch");
  if (subset.bits() >> a.size()) throw std::invalid_argument("subset index out of range");
  return lambda_with_scale(a, masses, subset).value;
}

bool check_bounded_below(const InteractionMatrix& a, std::span<const double> masses) {
  const Reduced r = drop_empty_species(a, masses);
  const std::size_t n = r.m.size();
  const IndexSubset full = IndexSubset::full(n);
  if (!lambda_with_scale(r.a, r.m, full).zero()) return false;
  for (std::uint32_t bits = 1; bits <= full.bits(); ++bits) {
    const IndexSubset J(bits);
    const Lambda lam = lambda_with_scale(r.a, r.m, J);
    if (!lam.nonnegative()) return false;
    if (!lam.zero()) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (!J.contains(i)) continue;
      if (!(r.a(i, i) + lambda_with_scale(r.a, r.m, J.without(i)).value > 0.0)) return false;
    }
  }
  return true;
}

bool check_minimizer_exists(const InteractionMatrix& a, std::span<const double> masses) {
  const Reduced r = drop_empty_species(a, masses);
  const IndexSubset full = IndexSubset::full(r.m.size());
  if (!lambda_with_scale(r.a, r.m, full).zero()) return false;
  for (std::uint32_t bits = 1; bits < full.bits(); ++bits) {
    if (!lambda_with_scale(r.a, r.m, IndexSubset(bits)).positive()) return false;
  }
  return true;
}

Th1System th1_matrix(const Parameters& p, const AuxiliaryParams& aux) {
  p.validate();
  if (!(aux.a > p.chi1) || !(aux.b > p.chi2)) {
    throw std::invalid_argument(
        fmt::format("auxiliary parameters need a > chi1, b > chi2 (a={}, b={})", aux.a, aux.b));
  }
  const double a = aux.a;
  const double b = aux.b;
  InteractionMatrix matrix(2, {a * a / (p.mu * p.mu), a * b / p.mu, a * b / p.mu, b * b});
  return Th1System{std::move(matrix), p.mu, aux};
}

std::optional<AuxiliaryParams> find_admissible_params(const MassPair& m, const Parameters& p) {
  p.validate();
  m.validate();
  const double t1 = m.theta1;
  const double t2 = m.theta2;
  const double s2 = m.total() * m.total();
  if (!(s2 > 0.0)) throw std::invalid_argument("find_admissible_params needs theta1 + theta2 > 0");

  // Work in x = 1/a, y = 1/b: the equality is the line
  //   8 pi mu t1 x + 8 pi t2 y = (t1 + t2)^2,
  // with x in [t1/(8 pi mu), 1/chi1) and y in [t2/(8 pi), 1/chi2).
  if (t1 == 0.0) {
    const double y = t2 / (8.0 * kPi);
    if (!(y < 1.0 / p.chi2)) return std::nullopt;
    return AuxiliaryParams{p.chi1 + 1.0, 1.0 / y};
  }
  if (t2 == 0.0) {
    const double x = t1 / (8.0 * kPi * p.mu);
    if (!(x < 1.0 / p.chi1)) return std::nullopt;
    return AuxiliaryParams{1.0 / x, p.chi2 + 1.0};
  }

  const double c1 = 8.0 * kPi * p.mu * t1;
  const double c2 = 8.0 * kPi * t2;
  // y >= t2/(8 pi)  <=>  x <= (s2 - t2^2)/c1 ;  y < 1/chi2  <=>  x > (s2 - c2/chi2)/c1
  const double lo = std::max(t1 / (8.0 * kPi * p.mu), (s2 - c2 / p.chi2) / c1);
  const double hi = std::min(1.0 / p.chi1, (s2 - t2 * t2) / c1);
  if (!(lo < hi)) return std::nullopt;

  const double x = 0.5 * (lo + hi);
  const double y = (s2 - c1 * x) / c2;
  return AuxiliaryParams{1.0 / x, 1.0 / y};
}

std::array<double, 2> entropy_coefficients(const Parameters& p, const AuxiliaryParams& aux) {
  return {p.mu * (1.0 / p.chi1 - 1.0 / aux.a), 1.0 / p.chi2 - 1.0 / aux.b};
}

}  // namespace ks2::hls
