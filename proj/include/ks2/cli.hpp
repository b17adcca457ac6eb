#pragma once

// Command layer of the `ks2` tool: classify, simulate, sweep, check.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ks2/config.hpp"
#include "ks2/model.hpp"
#include "ks2/solver.hpp"

namespace ks2::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kRuntime = 3 };

struct RunConfig {
  Parameters params;
  InitialData init;
  SolverConfig solver;
  std::uint64_t cadence = 10;
  bool write_csv = true;
  bool write_jsonl = false;
  std::uint64_t snapshot_every = 0;  ///< 0: final snapshot only
};

/// Reads params.*, grid.*, solver.*, species{1,2}.gaussian*, init.snapshot and
/// output.*; leaves unknown-key rejection to the caller.
RunConfig read_run_config(const Config& c);

struct ClassifyConfig {
  MassPair masses;
  Parameters params;
  double tol = 1e-12;
  double moment0 = 0.0;  ///< weighted second moment at t = 0 for the deadline
};

ClassifyConfig read_classify_config(const Config& c);
nlohmann::ordered_json classify_report(const ClassifyConfig& c);

enum class SweepAction { Classify, Probe };

struct SweepConfig {
  std::vector<double> theta1;
  std::vector<double> theta2;
  std::vector<double> mu;
  std::vector<double> chi1;
  std::vector<double> chi2;
  double tol = 1e-12;
  SweepAction action = SweepAction::Classify;
  // probe runs
  Grid grid{64, 64, 4.0};
  SolverConfig solver;
  double probe_sigma = 0.5;
  std::size_t workers = 1;
};

inline constexpr double kMaxProbeHorizon = 10.0;

SweepConfig read_sweep_config(const Config& c);

struct SweepRow {
  double theta1 = 0.0;
  double theta2 = 0.0;
  Parameters params;
  std::string label;
  double parabola_value = 0.0;
  double rate = 0.0;
  std::string probe;
};

/// Evaluates every grid point on `workers` threads; rows come back in grid
/// order (parameters outermost, then theta1, then theta2).
std::vector<SweepRow> run_sweep(const SweepConfig& cfg, std::size_t workers);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);
nlohmann::ordered_json sweep_meta(const SweepConfig& cfg);

/// Entry point used by tools/ks2.cpp; returns the process exit status.
int main(int argc, char** argv);

}  // namespace ks2::cli
