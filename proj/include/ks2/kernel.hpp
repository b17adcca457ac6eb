#pragma once

// Truncated logarithmic kernel K^eps and the free-space convolutions that
// produce the chemoattractant v = K^eps * (u1 + u2) and its gradient.
//
// K^eps(z) = K1(|z|/eps) - log(eps)/(2 pi), where K1 vanishes on the unit
// disc and equals -log|z|/(2 pi) outside radius 4. Between the two, K1 is
// written in the log-radius s = log(|z|/eps) as K1 = -g(s)/(2 pi): g' rises
// from 0 to 1 + overshoot through a quintic smoothstep and settles back to 1
// through a second one, with the settle position chosen so that g(s) = s
// beyond the blend. The kernel is therefore C^3, radially monotone,
// constant (zero gradient) on |z| <= eps, and exactly -log|z|/(2 pi) from
// eps * exp(blend_end) <= 4 eps outward.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "ks2/grid.hpp"

namespace ks2 {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Shape of K1 between radius 1 and radius 4, in the log-radius s.
struct LogBlend {
  double rise_width = 0.1;
  double overshoot = 0.08;
  double settle_width = 0.25;

  void validate() const;

  double settle_start() const;
  double end() const { return settle_start() + settle_width; }

  double integral(double s) const;   ///< g(s)
  double slope(double s) const;      ///< g'(s)
  double curvature(double s) const;  ///< g''(s)
};

struct KernelProfile {
  double epsilon = 1.0;
  LogBlend blend;

  void validate() const;
};

double kernel_value(const KernelProfile& profile, Vec2 z);
/// dK/dr at radius r.
double kernel_radial_derivative(const KernelProfile& profile, double r);
Vec2 kernel_gradient(const KernelProfile& profile, Vec2 z);
/// Analytic Laplacian of K^eps at radius r.
double kernel_laplacian(const KernelProfile& profile, double r);

/// Analytic sup of 2 pi |z| |grad K^eps(z)|, i.e. 1 + overshoot.
double gradient_constant(const KernelProfile& profile);

/// Upper bound on the negative part of -Laplacian(K^eps), attained inside the
/// settle step of the blend.
double superharmonic_defect(const KernelProfile& profile);

/// K^eps and grad K^eps sampled at the grid offsets needed by a zero-padded
/// free-space convolution, together with their transforms. Immutable once
/// built; convolutions may run concurrently.
class KernelTable {
 public:
  /// Throws std::invalid_argument when eps < h or the grid is invalid.
  static KernelTable build(const KernelProfile& profile, const Grid& grid);

  const Grid& grid() const;
  const KernelProfile& profile() const;
  std::size_t padded_nx() const;
  std::size_t padded_ny() const;

  /// Samples at offset (di, dj) cells, |di| < nx, |dj| < ny.
  double value_at(long di, long dj) const;
  Vec2 gradient_at(long di, long dj) const;

  /// Raw padded tables in wrap-around layout, row-major padded_ny x padded_nx.
  std::span<const double> values() const;
  std::span<const double> grad_x() const;
  std::span<const double> grad_y() const;

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  explicit KernelTable(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct ChemoField {
  Field v;
  Field grad_x;
  Field grad_y;
};

/// v = K^eps * (u1 + u2) h^2 and grad v = grad K^eps * (u1 + u2) h^2.
/// Throws std::invalid_argument on geometry mismatch.
ChemoField chemo_field(const KernelTable& table, const Field& u1, const Field& u2);

/// Gradient only; fills `grad_x` / `grad_y` (resized as needed).
void chemo_gradient(const KernelTable& table, const Field& density, Field& grad_x, Field& grad_y);

}  // namespace ks2
