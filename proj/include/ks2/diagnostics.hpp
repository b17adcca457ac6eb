#pragma once

// Integral quantities tracked along a run and the bounds they are checked
// against. All reductions use pairwise summation in a fixed order.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ks2/hls.hpp"
#include "ks2/kernel.hpp"
#include "ks2/model.hpp"
#include "ks2/state.hpp"

namespace ks2 {

/// Cells below this density contribute 0 to u log u.
inline constexpr double kDensityFloor = 1e-300;

struct DiagnosticsRecord {
  double t = 0.0;
  double mass1 = 0.0;
  double mass2 = 0.0;
  double weighted_moment = 0.0;  ///< int ((mu/chi1) u1 + u2/chi2) |x|^2
  double total_moment = 0.0;     ///< int (pi/chi1 u1 + pi/chi2 u2) |x|^2
  double entropy1 = 0.0;
  double entropy2 = 0.0;
  double mixed_entropy = 0.0;
  double free_energy = 0.0;
  double dissipation = 0.0;
  double max_u1 = 0.0;
  double max_u2 = 0.0;
  double boundary_mass_fraction = 0.0;
  double dt = 0.0;
  // Not part of the CSV columns:
  double dissipation_excluded_fraction = 0.0;  ///< mass skipped by the dissipation quadrature
  double second_moment1 = 0.0;                 ///< int u1 |x|^2
  double second_moment2 = 0.0;                 ///< int u2 |x|^2

  bool finite() const;
};

/// Column order of the CSV / key order of the JSON records.
const std::vector<std::string_view>& diagnostics_columns();
std::array<double, 14> diagnostics_values(const DiagnosticsRecord& r);

nlohmann::ordered_json to_json(const DiagnosticsRecord& r);

double total_mass(const Field& u);
double entropy(const Field& u);
double weighted_moment(const State& s, const Parameters& p);
double total_moment(const State& s, const Parameters& p);
/// Second moment int u |x|^2 of a single field.
double second_moment(const Field& u);
double mixed_entropy(const State& s, const Parameters& p);
double free_energy(const State& s, const Field& v, const Parameters& p);

struct Dissipation {
  double value = 0.0;
  double excluded_mass_fraction = 0.0;
};

/// (1/chi1) int u1 |mu grad log u1 - chi1 grad v|^2 + (1/chi2) int u2 |grad log u2 - chi2 grad v|^2
/// with centred differences for grad log u and the kernel-convolved grad v.
Dissipation dissipation(const State& s, const ChemoField& chemo, const Parameters& p);

/// M log M - M log(pi (1 + t)) with M = (mu/chi1) theta1 + theta2/chi2; the
/// additive constant of the lower entropy bound is not included.
double entropy_lower_bound(double t, const Parameters& p, const MassPair& m);

/// Mass fraction in the cells within `width` cells of the domain edge.
double boundary_mass_fraction(const State& s, std::size_t width = 4);

DiagnosticsRecord make_record(const State& s, const ChemoField& chemo, const Parameters& p, double dt);

class DiagnosticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EmitFormat { Csv, JsonLines };

/// Appends records to a stream: CSV writes the header before the first row.
/// Rejects non-finite records with DiagnosticsError; stream failures are
/// reported as std::ios_base::failure.
class DiagnosticsEmitter {
 public:
  DiagnosticsEmitter(std::ostream& out, EmitFormat format) : out_(out), format_(format) {}
  void emit(const DiagnosticsRecord& r);
  std::size_t rows() const { return rows_; }

 private:
  std::ostream& out_;
  EmitFormat format_;
  std::size_t rows_ = 0;
};

/// Parses CSV produced by DiagnosticsEmitter (used for round-trip checks).
std::vector<DiagnosticsRecord> parse_diagnostics_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Bounds along a run

struct BoundFlag {
  std::string name;
  bool violated = false;
  double worst_margin = 0.0;  ///< most negative margin seen (>= 0 means satisfied)
  double tolerance = 0.0;
};

struct BoundReport {
  double entropy_lower = 0.0;  ///< entropy_lower_bound at the last sample
  std::optional<std::array<double, 2>> te_coefficients;
  double moment_prediction = 0.0;  ///< K t + m(0) at the last sample
  std::vector<BoundFlag> flags;

  bool any_violation() const;
};

nlohmann::ordered_json to_json(const BoundReport& r);

/// Follows a run sample by sample and checks:
///  - mass conservation (relative 1e-8),
///  - free-energy monotonicity (1e-6 (1 + |E|) per sample),
///  - the weighted moment against K t + m(0) (relative 3%, informational for
///    blow-up runs),
///  - the explicit form of the lower entropy bound for each species,
///    entropy_i >= m_i log m_i - m_i log(pi (1 + t)) - int u_i |x|^2 / (1 + t).
class BoundMonitor {
 public:
  BoundMonitor(const Parameters& p, const MassPair& masses);

  void observe(const DiagnosticsRecord& r);
  BoundReport report() const;

 private:
  BoundFlag& flag(std::string_view name, double tolerance);
  void check(std::string_view name, double margin, double tolerance);

  Parameters params_;
  MassPair masses_;
  double rate_ = 0.0;
  std::optional<DiagnosticsRecord> first_;
  std::optional<DiagnosticsRecord> last_;
  std::vector<BoundFlag> flags_;
};

}  // namespace ks2
