#pragma once

// Logarithmic HLS conditions for systems: the Lambda_J polynomials, the
// boundedness / minimizer predicates, and the auxiliary (a, b) construction
// that turns the two-species entropy bound into an HLS statement.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ks2/model.hpp"

namespace ks2::hls {

/// Relative tolerance used for the equalities Lambda_J = 0.
inline constexpr double kRelTol = 1e-12;

/// Symmetric n x n matrix with nonnegative entries, row-major.
class InteractionMatrix {
 public:
  InteractionMatrix() = default;
  /// Throws std::invalid_argument if `entries` is not n*n, not symmetric,
  /// or has a negative entry.
  InteractionMatrix(std::size_t n, std::vector<double> entries);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  /// Principal submatrix on the listed indices.
  InteractionMatrix restricted(std::span<const std::size_t> keep) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// Subset of {0, .., n-1} as a bit mask (n <= 31).
class IndexSubset {
 public:
  constexpr IndexSubset() = default;
  constexpr explicit IndexSubset(std::uint32_t bits) : bits_(bits) {}
  static IndexSubset full(std::size_t n) { return IndexSubset((1u << n) - 1u); }
  static IndexSubset of(std::initializer_list<std::size_t> idx);

  constexpr bool contains(std::size_t i) const { return (bits_ >> i) & 1u; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint32_t bits() const { return bits_; }
  constexpr IndexSubset without(std::size_t i) const { return IndexSubset(bits_ & ~(1u << i)); }
  constexpr bool operator==(const IndexSubset&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

/// Lambda_J(M) = 8*pi*sum_{i in J} M_i - sum_{i,j in J} a_ij M_i M_j.
double lambda_J(const InteractionMatrix& a, std::span<const double> masses, IndexSubset subset);

/// Boundedness from below of the multi-species log-HLS functional on Gamma_M.
bool check_bounded_below(const InteractionMatrix& a, std::span<const double> masses);

/// Existence of a minimizer of the functional on Gamma_M.
bool check_minimizer_exists(const InteractionMatrix& a, std::span<const double> masses);

struct AuxiliaryParams {
  double a = 0.0;  ///< > chi1
  double b = 0.0;  ///< > chi2
};

/// The rescaled two-species system: coefficient matrix for (mu u1/a, u2/b).
struct Th1System {
  InteractionMatrix matrix;
  double mu = 1.0;
  AuxiliaryParams aux;

  std::array<double, 2> map_masses(const MassPair& m) const {
    return {mu * m.theta1 / aux.a, m.theta2 / aux.b};
  }
};

/// Builds A = [[a^2/mu^2, ab/mu], [ab/mu, b^2]]. Throws if aux violates
/// a > chi1, b > chi2.
Th1System th1_matrix(const Parameters& p, const AuxiliaryParams& aux);

/// Searches (1/a, 1/b) on the line 8*pi*mu*theta1/a + 8*pi*theta2/b = (theta1+theta2)^2
/// for a point with a > chi1, b > chi2, theta1 <= 8*pi*mu/a and theta2 <= 8*pi/b.
/// Returns the midpoint of the feasible segment. Throws on theta1 + theta2 == 0.
std::optional<AuxiliaryParams> find_admissible_params(const MassPair& m, const Parameters& p);

/// Coefficients mu(1/chi1 - 1/a) and (1/chi2 - 1/b) of the entropies in the
/// upper entropy estimate.
std::array<double, 2> entropy_coefficients(const Parameters& p, const AuxiliaryParams& aux);

}  // namespace ks2::hls
