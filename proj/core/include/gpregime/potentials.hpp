#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gpregime/radial.hpp"

namespace gpregime::potentials {

enum class InteractionKind {
  SquareWell,  ///< V0 on [0, R]
  SmoothBump,  ///< V0 (1 - r^2/R^2)^2 on [0, R]
  Tabulated,   ///< arbitrary samples, linear interpolation
};

/// Two-body interaction V(|x|): non-negative, compactly supported, in L^3.
struct InteractionPotential {
  InteractionKind kind = InteractionKind::SquareWell;
  double strength = 0.0;  ///< V0 (unused for tabulated)
  RadialProfile profile;
  double support_radius = 0.0;
  double l3_norm = 0.0;

  double operator()(double r) const;
  bool is_zero() const;
};

enum class TrapKind { Harmonic, Quartic };

/// Confining potential V_ext(|x|) with closed-form gradient and Laplacian.
struct TrapPotential {
  TrapKind kind = TrapKind::Harmonic;
  RadialProfile profile;
  RadialProfile gradient;   ///< d/dr V_ext
  RadialProfile laplacian;  ///< V_ext'' + 2 V_ext' / r
  double growth_constant = 0.0;

  double operator()(double r) const;
  double radial_derivative(double r) const;
  double laplacian_value(double r) const;
  /// Frequency omega of the harmonic approximation V_ext ~ omega^2 r^2 used
  /// for Gaussian initial data and grid sizing.
  double harmonic_frequency() const;
};

InteractionPotential make_square_well(double v0, double radius, std::size_t n_pts);
InteractionPotential make_smooth_bump(double v0, double radius, std::size_t n_pts);
InteractionPotential make_tabulated(RadialProfile profile);

TrapPotential make_trap(TrapKind kind, std::size_t n_pts, double r_max);
TrapPotential make_trap(std::string_view kind, std::size_t n_pts, double r_max);

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double witness = 0.0;
  long node = -1;  ///< offending node index, or -1
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const;
  const ValidationCheck* find(std::string_view name) const;
};

ValidationReport validate(const InteractionPotential& v);
ValidationReport validate(const TrapPotential& trap);

/// Smallest C with V_ext(x+y) <= C (V_ext(x) + C)(V_ext(y) + C) over all pairs
/// of points of the cubic lattice {-half_width..half_width}^3 * spacing, with
/// V_ext read from the sampled profile. A sampled certificate, not a proof.
double submultiplicativity_constant(const TrapPotential& trap, int half_width = 5,
                                    double spacing = 1.0);

/// Least-squares exponential rate of |g(r)| on the outer half of its grid.
double fitted_exponential_rate(const RadialProfile& g);

using AnyPotential = std::variant<InteractionPotential, TrapPotential>;

nlohmann::json to_json(const InteractionPotential& v);
nlohmann::json to_json(const TrapPotential& trap);
/// Parses {kind, parameters, grid}. Throws ConfigError on malformed input.
AnyPotential potential_from_json(const nlohmann::json& j);
AnyPotential load_potential(const std::string& path);

}  // namespace gpregime::potentials
