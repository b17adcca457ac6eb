#pragma once

#include <optional>
#include <string_view>
#include <utility>

namespace ks2 {

inline constexpr double kPi = 3.14159265358979323846;

/// Physical constants of the two-species system. Species 1 diffuses with
/// `mu`, species 2 with unit diffusivity; both are attracted by the same
/// chemical with sensitivities `chi1` and `chi2`.
struct Parameters {
  double mu = 1.0;
  double chi1 = 1.0;
  double chi2 = 1.0;

  /// Throws std::invalid_argument unless all three constants are positive and finite.
  void validate() const;
};

/// A point (theta1, theta2) of the mass plane.
struct MassPair {
  double theta1 = 0.0;
  double theta2 = 0.0;

  double total() const { return theta1 + theta2; }
  void validate() const;
};

enum class RegionLabel { GlobalExistence, BlowupRadial, BlowupGeneral, Boundary };

std::string_view to_string(RegionLabel label);
std::optional<RegionLabel> parse_region_label(std::string_view text);

/// 8*pi*(mu*theta1/chi1 + theta2/chi2) - (theta1 + theta2)^2.
double parabola_value(const MassPair& m, const Parameters& p);

/// Critical single-species masses 8*pi*mu/chi1 and 8*pi/chi2.
double species1_threshold(const Parameters& p);
double species2_threshold(const Parameters& p);

/// Signed distances of the three defining expressions together with the
/// scale used for the relative boundary test.
struct RegionMargins {
  double parabola = 0.0;  ///< parabola_value (> 0 inside)
  double parabola_scale = 0.0;
  double line1 = 0.0;  ///< threshold1 - theta1 (> 0 below the line)
  double line1_scale = 0.0;
  double line2 = 0.0;  ///< threshold2 - theta2
  double line2_scale = 0.0;
};

RegionMargins region_margins(const MassPair& m, const Parameters& p);

/// Region of the mass plane. An expression e is treated as zero when
/// |e| <= tol * (1 + |scale|), scale being the largest term of e; Boundary
/// wins over every open-region label.
RegionLabel classify(const MassPair& m, const Parameters& p, double tol);

/// True iff the threshold parabola meets one of the lines
/// theta1 = 8*pi*mu/chi1, theta2 = 8*pi/chi2 in the open first quadrant.
bool intersects_lines(const Parameters& p);

/// Exchanges the roles of the species by rescaling time with mu.
std::pair<MassPair, Parameters> swap_species(const MassPair& m, const Parameters& p);

/// Constant growth rate of the weighted second moment
/// d/dt int ((mu/chi1) u1 + u2/chi2) |x|^2 dx.
double moment_rate(const MassPair& m, const Parameters& p);

/// Time at which a second moment starting at `m0` and changing at rate `rate`
/// would reach zero; empty when the moment does not decrease.
std::optional<double> predict_blowup_deadline(double m0, double rate);

}  // namespace ks2
