#pragma once

#include <cstdint>

#include "ks2/grid.hpp"

namespace ks2 {

/// Both densities on a shared grid plus the simulation clock.
struct State {
  Field u1;
  Field u2;
  double t = 0.0;
  std::uint64_t step_count = 0;

  const Grid& grid() const { return u1.grid; }

  /// Throws std::invalid_argument when the fields disagree on geometry or
  /// hold a negative / non-finite density.
  void validate() const;
};

}  // namespace ks2
