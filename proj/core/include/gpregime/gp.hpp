#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gpregime/numerics.hpp"
#include "gpregime/potentials.hpp"
#include "gpregime/report.hpp"
#include "gpregime/slope.hpp"

namespace gpregime::gp {

/// Uniform radial grid r_i = i h, i = 1..n, with n h < r_max and
/// chi(0) = chi(r_max) = 0 for chi = r phi.
struct GridSpec {
  double r_max = 10.0;
  double h = 0.02;
};

struct Energy {
  double kinetic = 0.0;
  double trap = 0.0;
  double interaction = 0.0;
  double total = 0.0;
};

struct GpState {
  double h = 0.0;
  double r_max = 0.0;
  std::vector<double> r;    ///< interior nodes
  std::vector<double> chi;  ///< r phi
  std::vector<double> phi;
  std::vector<double> v_ext;
  double a0 = 0.0;
  Energy energy;
  double eps_gp = 0.0;    ///< E_GP + 4 pi a0 ||phi||_4^4
  double rayleigh = 0.0;  ///< <phi, (-Delta + V_ext + 8 pi a0 phi^2) phi>
  double residual = 0.0;
  double norm = 0.0;      ///< 4 pi int phi^2 r^2 dr
  double phi4 = 0.0;      ///< ||phi||_4^4
  int iterations = 0;
  std::vector<double> energy_history;

  /// phi at an arbitrary radius (cubic interpolation of chi; zero past r_max).
  double phi_at(double r) const;
};

/// Cubic Hermite interpolant of phi built once from a state.
class PhiInterpolant {
 public:
  explicit PhiInterpolant(const GpState& state);
  double operator()(double r) const;
  double derivative(double r) const;
  double r_max() const { return r_max_; }

 private:
  numerics::HermiteSpline chi_;
  double r_max_ = 0.0;
  double h_ = 0.0;
};

struct MinimizeOptions {
  double tol = 1e-8;
  int max_iterations = 5000;
  double initial_step = 10.0;
  const GpState* initial = nullptr;  ///< warm start (must share the grid)
};

GpState minimize_gp(const potentials::TrapPotential& trap, double a0, const GridSpec& grid,
                    const MinimizeOptions& options = {});

/// Builds a state from a given profile (normalised unless told otherwise) and
/// fills energy, eps_gp and residual.
GpState make_state(const potentials::TrapPotential& trap, double a0, const GridSpec& grid,
                   const std::function<double(double)>& phi, bool normalize = true);

/// Energies for chi on the state's grid (for perturbation tests).
Energy energy_of(const GpState& like, const std::vector<double>& chi);

/// L^2 norm of -Delta phi + V_ext phi + 8 pi a0 phi^3 - eps phi with eps the
/// state's multiplier.
double el_residual(const GpState& state);

struct DecayReport {
  double nu = 0.0;
  double c_phi = 0.0;
  double c_dphi = 0.0;
  double c_laplacian = 0.0;
  double trusted_radius = 0.0;
  bool pass = false;  ///< all finite and no supremum pinned at the trusted edge
  std::string failure;
};

DecayReport verify_decay(const GpState& state, double nu);

/// (2/p) int phi(r) r sin(2 pi p r) dr; p = 0 gives 4 pi int phi r^2.
double phi_hat(const GpState& state, double p);

struct FourierDecayReport {
  std::vector<double> p;
  std::vector<double> phi_hat;
  double sup_weighted = 0.0;  ///< sup |phi_hat| (1 + p)^4
  double phi_hat0 = 0.0;
  SlopeFit tail_slope;        ///< log |phi_hat| against log p on the resolved tail
  double fit_p_lo = 0.0;
  double fit_p_hi = 0.0;
};

FourierDecayReport fourier_decay(const GpState& state, const std::vector<double>& p_grid);

struct VextBound {
  double sup_vext_phi = 0.0;
  double vext2_phi2 = 0.0;  ///< 4 pi int V_ext^2 phi^2 r^2 dr
};

VextBound vext_phi_bound(const GpState& state, const potentials::TrapPotential& trap);

struct SpectrumResult {
  std::vector<double> eigenvalues;
  std::vector<double> overlaps;
  double gap = 0.0;
  std::vector<std::vector<double>> vectors;  ///< chi-basis eigenvectors, 4 pi h-normalised
};

/// Lowest k eigenpairs of the s-wave restriction of
/// -Delta + V_ext + 8 pi a0 phi^2 - eps_gp.
SpectrumResult hgp_spectrum(const GpState& state, const potentials::TrapPotential& trap,
                            std::size_t k);

/// Default grid for a trap: h = 0.02 and r_max from the harmonic Gaussian
/// falling below 1e-12, with margin.
GridSpec default_grid(const potentials::TrapPotential& trap);

LemmaReport verify_gap(const GpState& state, const potentials::TrapPotential& trap);
LemmaReport verify_appendix_decay(const GpState& state, const potentials::TrapPotential& trap,
                                  const GpState& refined);

}  // namespace gpregime::gp
