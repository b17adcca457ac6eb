#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ks2 {

/// Uniform cell-centred grid on the square [-L, L]^2 with square cells.
struct Grid {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double half_width = 0.0;  ///< L

  /// Throws std::invalid_argument for empty, non-square, or non-positive grids.
  void validate() const;

  double spacing() const { return 2.0 * half_width / static_cast<double>(nx); }
  double cell_area() const { return spacing() * spacing(); }
  std::size_t cells() const { return nx * ny; }
  double x(std::size_t i) const { return -half_width + (static_cast<double>(i) + 0.5) * spacing(); }
  double y(std::size_t j) const { return -half_width + (static_cast<double>(j) + 0.5) * spacing(); }

  bool operator==(const Grid&) const = default;
};

/// Scalar field sampled at cell centres, row-major (index j * nx + i).
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.cells(), fill) {}

  double& at(std::size_t i, std::size_t j) { return values[j * grid.nx + i]; }
  double at(std::size_t i, std::size_t j) const { return values[j * grid.nx + i]; }

  std::span<const double> span() const { return values; }
};

/// Pairwise (cascade) summation with a fixed split order, so the result does
/// not depend on how callers partition work.
double pairwise_sum(std::span<const double> values);

/// Largest entry; 0 for an empty span.
double max_value(std::span<const double> values);

}  // namespace ks2
