#include "ks2/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>
#include <fmt/format.h>

#include "ks2/model.hpp"

namespace ks2 {

namespace {

// Quintic smoothstep and its antiderivative / derivative on [0, 1].
double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

double smoothstep_integral(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 0.5 + (t - 1.0);
  const double t4 = t * t * t * t;
  return t4 * (2.5 - 3.0 * t + t * t);
}

double smoothstep_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = t * (1.0 - t);
  return 30.0 * u * u;
}

constexpr double kSmoothstepMaxSlope = 1.875;

const double kLog4 = std::log(4.0);

// fftw planning is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct PlanDeleter {
  void operator()(fftw_plan p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

}  // namespace

// ---------------------------------------------------------------------------
// Profile

void LogBlend::validate() const {
  if (!(rise_width > 0.0 && overshoot > 0.0 && settle_width > 0.0)) {
    throw std::invalid_argument("blend widths and overshoot must be positive");
  }
  if (settle_start() < 0.0 || end() > kLog4) {
    throw std::invalid_argument(
        fmt::format("blend does not fit in [eps, 4 eps]: settles on [{}, {}] (log-radius)", settle_start(), end()));
  }
}

double LogBlend::settle_start() const {
  // Chosen so that g(s) = s once both steps are complete.
  return (1.0 + overshoot) * rise_width / (2.0 * overshoot) - 0.5 * settle_width;
}

double LogBlend::integral(double s) const {
  return (1.0 + overshoot) * rise_width * smoothstep_integral(s / rise_width) -
         overshoot * settle_width * smoothstep_integral((s - settle_start()) / settle_width);
}

double LogBlend::slope(double s) const {
  return (1.0 + overshoot) * smoothstep(s / rise_width) -
         overshoot * smoothstep((s - settle_start()) / settle_width);
}

double LogBlend::curvature(double s) const {
  return (1.0 + overshoot) * smoothstep_derivative(s / rise_width) / rise_width -
         overshoot * smoothstep_derivative((s - settle_start()) / settle_width) / settle_width;
}

void KernelProfile::validate() const {
  if (!(std::isfinite(epsilon) && epsilon > 0.0)) {
    throw std::invalid_argument(fmt::format("kernel epsilon must be positive, got {}", epsilon));
  }
  blend.validate();
}

double kernel_value(const KernelProfile& profile, Vec2 z) {
  const double eps = profile.epsilon;
  const double r = std::hypot(z.x, z.y);
  if (r <= eps) return -std::log(eps) / (2.0 * kPi);
  const double s = std::log(r / eps);
  if (r >= 4.0 * eps || s >= profile.blend.end()) return -std::log(r) / (2.0 * kPi);
  return -(profile.blend.integral(s) + std::log(eps)) / (2.0 * kPi);
}

double kernel_radial_derivative(const KernelProfile& profile, double r) {
  const double eps = profile.epsilon;
  if (r <= eps) return 0.0;
  const double s = std::log(r / eps);
  if (r >= 4.0 * eps || s >= profile.blend.end()) return -1.0 / (2.0 * kPi * r);
  return -profile.blend.slope(s) / (2.0 * kPi * r);
}

Vec2 kernel_gradient(const KernelProfile& profile, Vec2 z) {
  const double r = std::hypot(z.x, z.y);
  if (r == 0.0) return {};
  const double dr = kernel_radial_derivative(profile, r);
  return {dr * z.x / r, dr * z.y / r};
}

double kernel_laplacian(const KernelProfile& profile, double r) {
  const double eps = profile.epsilon;
  if (r <= eps) return 0.0;
  const double s = std::log(r / eps);
  if (r >= 4.0 * eps || s >= profile.blend.end()) return 0.0;
  return -profile.blend.curvature(s) / (2.0 * kPi * r * r);
}

double gradient_constant(const KernelProfile& profile) { return 1.0 + profile.blend.overshoot; }

double superharmonic_defect(const KernelProfile& profile) {
  const LogBlend& b = profile.blend;
  const double rmin = profile.epsilon * std::exp(std::max(b.settle_start(), 0.0));
  return b.overshoot * kSmoothstepMaxSlope / b.settle_width / (2.0 * kPi * rmin * rmin);
}

// ---------------------------------------------------------------------------
// Table

struct KernelTable::Impl {
  Grid grid;
  KernelProfile profile;
  std::size_t px = 0;
  std::size_t py = 0;
  std::vector<double> k;
  std::vector<double> kx;
  std::vector<double> ky;
  // Transforms of h^2 * table / (px * py): multiply and invert directly.
  std::vector<std::complex<double>> k_hat;
  std::vector<std::complex<double>> kx_hat;
  std::vector<std::complex<double>> ky_hat;
  Plan forward;
  Plan backward;

  std::size_t spectral_size() const { return py * (px / 2 + 1); }

  std::size_t wrap(long di, long dj) const {
    const auto i = static_cast<std::size_t>((di + static_cast<long>(px)) % static_cast<long>(px));
    const auto j = static_cast<std::size_t>((dj + static_cast<long>(py)) % static_cast<long>(py));
    return j * px + i;
  }
};

KernelTable KernelTable::build(const KernelProfile& profile, const Grid& grid) {
  profile.validate();
  grid.validate();
  const double h = grid.spacing();
  if (profile.epsilon < h) {
    throw std::invalid_argument(
        fmt::format("kernel epsilon {} is below the grid spacing {}; the truncation is not resolved",
                    profile.epsilon, h));
  }

  auto impl = std::make_shared<Impl>();
  impl->grid = grid;
  impl->profile = profile;
  impl->px = 2 * grid.nx;
  impl->py = 2 * grid.ny;
  const std::size_t px = impl->px;
  const std::size_t py = impl->py;
  impl->k.assign(px * py, 0.0);
  impl->kx.assign(px * py, 0.0);
  impl->ky.assign(px * py, 0.0);

  const long nx = static_cast<long>(grid.nx);
  const long ny = static_cast<long>(grid.ny);
#pragma omp parallel for schedule(static)
  for (long dj = -(ny - 1); dj <= ny - 1; ++dj) {
    for (long di = -(nx - 1); di <= nx - 1; ++di) {
      const Vec2 z{static_cast<double>(di) * h, static_cast<double>(dj) * h};
      const std::size_t idx = impl->wrap(di, dj);
      impl->k[idx] = kernel_value(profile, z);
      const Vec2 g = kernel_gradient(profile, z);
      impl->kx[idx] = g.x;
      impl->ky[idx] = g.y;
    }
  }

  const std::size_t nc = impl->spectral_size();
  auto real = fftw_buffer<double>(px * py);
  auto spec = fftw_buffer<fftw_complex>(nc);
  {
    std::lock_guard lock(planner_mutex());
    impl->forward.reset(fftw_plan_dft_r2c_2d(static_cast<int>(py), static_cast<int>(px), real.get(),
                                             spec.get(), FFTW_ESTIMATE));
    impl->backward.reset(fftw_plan_dft_c2r_2d(static_cast<int>(py), static_cast<int>(px), spec.get(),
                                              real.get(), FFTW_ESTIMATE));
  }
  if (!impl->forward || !impl->backward) throw std::runtime_error("fftw planning failed");

  const double scale = h * h / static_cast<double>(px * py);
  auto transform = [&](const std::vector<double>& table, std::vector<std::complex<double>>& out) {
    std::copy(table.begin(), table.end(), real.get());
    fftw_execute_dft_r2c(impl->forward.get(), real.get(), spec.get());
    out.resize(nc);
    for (std::size_t q = 0; q < nc; ++q) out[q] = std::complex<double>(spec[q][0], spec[q][1]) * scale;
  };
  transform(impl->k, impl->k_hat);
  transform(impl->kx, impl->kx_hat);
  transform(impl->ky, impl->ky_hat);

  return KernelTable(std::move(impl));
}

const Grid& KernelTable::grid() const { return impl_->grid; }
const KernelProfile& KernelTable::profile() const { return impl_->profile; }
std::size_t KernelTable::padded_nx() const { return impl_->px; }
std::size_t KernelTable::padded_ny() const { return impl_->py; }
double KernelTable::value_at(long di, long dj) const { return impl_->k[impl_->wrap(di, dj)]; }
Vec2 KernelTable::gradient_at(long di, long dj) const {
  const std::size_t idx = impl_->wrap(di, dj);
  return {impl_->kx[idx], impl_->ky[idx]};
}
std::span<const double> KernelTable::values() const { return impl_->k; }
std::span<const double> KernelTable::grad_x() const { return impl_->kx; }
std::span<const double> KernelTable::grad_y() const { return impl_->ky; }

// ---------------------------------------------------------------------------
// Convolution

namespace {

class Convolution {
 public:
  explicit Convolution(const KernelTable::Impl& t)
      : t_(t), real_(fftw_buffer<double>(t.px * t.py)),
        density_hat_(fftw_buffer<fftw_complex>(t.spectral_size())),
        work_(fftw_buffer<fftw_complex>(t.spectral_size())) {}

  void load_density(const Field* a, const Field* b) {
    const Grid& g = t_.grid;
    std::fill(real_.get(), real_.get() + t_.px * t_.py, 0.0);
    for (std::size_t j = 0; j < g.ny; ++j) {
      double* row = real_.get() + j * t_.px;
      for (std::size_t i = 0; i < g.nx; ++i) {
        double v = a->at(i, j);
        if (b) v += b->at(i, j);
        row[i] = v;
      }
    }
    fftw_execute_dft_r2c(t_.forward.get(), real_.get(), density_hat_.get());
  }

  void apply(const std::vector<std::complex<double>>& kernel_hat, Field& out) {
    const std::size_t nc = t_.spectral_size();
    for (std::size_t q = 0; q < nc; ++q) {
      const std::complex<double> d(density_hat_[q][0], density_hat_[q][1]);
      const std::complex<double> r = d * kernel_hat[q];
      work_[q][0] = r.real();
      work_[q][1] = r.imag();
    }
    fftw_execute_dft_c2r(t_.backward.get(), work_.get(), real_.get());
    const Grid& g = t_.grid;
    if (!(out.grid == g) || out.values.size() != g.cells()) out = Field(g);
    for (std::size_t j = 0; j < g.ny; ++j) {
      const double* row = real_.get() + j * t_.px;
      std::copy(row, row + g.nx, out.values.begin() + static_cast<long>(j * g.nx));
    }
  }

 private:
  const KernelTable::Impl& t_;
  FftwBuffer<double> real_;
  FftwBuffer<fftw_complex> density_hat_;
  FftwBuffer<fftw_complex> work_;
};

void require_geometry(const KernelTable& table, const Field& f, const char* name) {
  if (!(f.grid == table.grid()) || f.values.size() != table.grid().cells()) {
    throw std::invalid_argument(fmt::format("{} does not share the kernel table's grid geometry", name));
  }
}

}  // namespace

ChemoField chemo_field(const KernelTable& table, const Field& u1, const Field& u2) {
  require_geometry(table, u1, "u1");
  require_geometry(table, u2, "u2");
  Convolution conv(table.impl());
  conv.load_density(&u1, &u2);
  ChemoField out{Field(table.grid()), Field(table.grid()), Field(table.grid())};
  conv.apply(table.impl().k_hat, out.v);
  conv.apply(table.impl().kx_hat, out.grad_x);
  conv.apply(table.impl().ky_hat, out.grad_y);
  return out;
}

void chemo_gradient(const KernelTable& table, const Field& density, Field& grad_x, Field& grad_y) {
  require_geometry(table, density, "density");
  Convolution conv(table.impl());
  conv.load_density(&density, nullptr);
  conv.apply(table.impl().kx_hat, grad_x);
  conv.apply(table.impl().ky_hat, grad_y);
}

}  // namespace ks2
