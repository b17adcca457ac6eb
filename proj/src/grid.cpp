#include "ks2/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace ks2 {

void Grid::validate() const {
  if (nx < 2 || ny < 2) throw std::invalid_argument(fmt::format("grid {}x{} is too small", nx, ny));
  if (nx != ny) {
    throw std::invalid_argument(fmt::format("grid must have square cells on [-L,L]^2 (nx == ny), got {}x{}", nx, ny));
  }
  if (!(std::isfinite(half_width) && half_width > 0.0)) {
    throw std::invalid_argument(fmt::format("grid half-width must be positive, got {}", half_width));
  }
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 64;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double max_value(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return *std::max_element(values.begin(), values.end());
}

}  // namespace ks2
