#pragma once

// Self-check suites behind `ks2 check`. Each property reports the measured
// value, its tolerance and the signed margin (>= 0 passes).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ks2/kernel.hpp"

namespace ks2 {

struct PropertyResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  double margin = 0.0;
  std::string detail;
};

struct CheckReport {
  std::string kind;
  std::vector<PropertyResult> properties;

  bool passed() const;
  const PropertyResult* find(std::string_view name) const;
};

nlohmann::ordered_json to_json(const CheckReport& r);

struct KernelCheckOptions {
  KernelProfile profile;            ///< contract checks, reference eps = 1
  double table_half_width = 16.0;   ///< grid for the table properties
  std::size_t table_cells = 128;
  double gaussian_half_width = 8.0;  ///< grid for the Gaussian velocity comparison
  std::size_t gaussian_cells = 256;
  double gaussian_sigma = 1.0;
};

CheckReport check_kernel(const KernelCheckOptions& opt = {});

struct HlsCheckOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 20240611;
};

CheckReport check_hls(const HlsCheckOptions& opt = {});

struct ConservationCheckOptions {
  std::size_t cells = 64;
  double half_width = 4.0;
  std::uint64_t steps = 500;
};

CheckReport check_conservation(const ConservationCheckOptions& opt = {});

/// kind is "kernel", "hls" or "conservation"; throws std::invalid_argument otherwise.
CheckReport run_check(std::string_view kind);

}  // namespace ks2
