#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "gpregime/gp.hpp"
#include "gpregime/report.hpp"
#include "gpregime/scattering.hpp"

namespace gpregime::kernels {

/// High-pass indicator |p| >= ell^{-alpha}, its complement, and the Gaussian
/// low-pass g_L(p) = exp(-(ell^beta p)^2).
struct CutoffPair {
  double ell = 0.5;
  double alpha = 4.0;
  double beta = 2.0;

  double P() const;  ///< ell^{-alpha}
  double chi_H(double p) const { return std::abs(p) >= P() ? 1.0 : 0.0; }
  double chi_Hc(double p) const { return 1.0 - chi_H(p); }
  double g_L(double p) const;
  /// Position-space form (sqrt(pi) ell^{-beta})^3 exp(-(pi ell^{-beta} x)^2).
  double g_L_check(double r) const;
};

CutoffPair make_cutoff(double ell, double alpha, double beta);

struct GaussianLowpass {
  CutoffPair cut;
  double l1_norm = 0.0;        ///< quadrature
  double l2_norm = 0.0;        ///< quadrature
  double l2_closed_form = 0.0; ///< pi^{3/2} (2 pi)^{-3/4} ell^{-3 beta/2}
};

GaussianLowpass build_gaussian_lowpass(double ell, double beta);

/// G(x) = -N w_ell(N x), with transform G_hat(p) = -N^{-2} w_hat(p/N).
class KernelG {
 public:
  explicit KernelG(scattering::NeumannSolution sol);

  double N() const { return sol_.N_param; }
  double ell() const { return sol_.ell; }
  double operator()(double r) const { return -N() * sol_.w(N() * r); }
  double hat(double p) const;
  /// sup over a log grid of p^2 |G_hat(p)|.
  double sup_p2_hat(std::size_t count = 64) const;
  bool is_zero() const;
  const scattering::NeumannSolution& source() const { return sol_; }

 private:
  scattering::NeumannSolution sol_;
};

KernelG build_G(const scattering::NeumannSolution& sol);

/// Tabulated G_hat on a log-uniform momentum grid, interpolated as a cubic
/// spline of p^2 G_hat(p) in log p.
class MomentumTable {
 public:
  MomentumTable(const KernelG& G, double p_lo, double p_hi, std::size_t per_decade);
  double operator()(double p) const;  ///< G_hat(p) on [p_lo, p_hi], 0 outside
  double p_lo() const { return p_lo_; }
  double p_hi() const { return p_hi_; }

 private:
  double p_lo_, p_hi_;
  std::shared_ptr<const boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
};

/// Kernel g(x - y) u(x) v(y) kept in factored form. The radial factor g is
/// the inverse transform of G_hat chi_H.
struct FactorizedKernel {
  std::shared_ptr<const KernelG> G;
  std::shared_ptr<const MomentumTable> g_hat_table;  ///< G_hat on [P, p_max]
  std::shared_ptr<const MomentumTable> low_table;    ///< G_hat on [p_min, P]
  std::shared_ptr<const gp::PhiInterpolant> phi;
  CutoffPair cut;
  bool left_is_phi = true;  ///< false for nu_H (left weight 1)
  bool zero = false;

  double g_hat(double p) const;
  /// G_low(r): inverse transform of G_hat restricted to |p| < P.
  double G_low(double r) const;
  /// g(r) = G(r) - G_low(r).
  double g(double r) const;
  double u(double r) const { return left_is_phi ? (*phi)(r) : 1.0; }
  double v(double r) const { return (*phi)(r); }
  double operator()(const std::array<double, 3>& x, const std::array<double, 3>& y) const;
};

FactorizedKernel build_eta_H(const KernelG& G, const gp::GpState& phi, const CutoffPair& cut);
FactorizedKernel build_nu_H(const KernelG& G, const gp::GpState& phi, const CutoffPair& cut);

/// g(x - y) by an independent route: G from w_ell directly and G_low by a
/// two-dimensional (p, cos theta) quadrature in momentum space.
double g_direct_3d(const FactorizedKernel& k, const std::array<double, 3>& d);

struct NormReport {
  double eta_norm = 0.0;          ///< ||eta_H||_HS
  double sup_eta_x_ratio = 0.0;   ///< sup_x ||eta_{H,x}|| / |phi(x)|
  double grad1_norm = 0.0;        ///< ||grad_1 eta_H||
  double pointwise_ratio = 0.0;   ///< ||g_hat||_1 / N >= sup |eta| / (N phi phi)
  double g0_over_N = 0.0;         ///< g(0) / N
  double g_l2 = 0.0;              ///< ||g||_2
  double k_max = 0.0;             ///< momentum cut for the density transform
};

NormReport eta_norms(const FactorizedKernel& k);

struct NuNormReport {
  double nu_norm = 0.0;
  double sup_nu_x = 0.0;
  double sup_nu_y_ratio = 0.0;
  double sup_p2_nu_slice = 0.0;  ///< sup_p p^2 ||nu_hat_{H,p}|| = sup_{p >= P} p^2 |G_hat(p)|
};

NuNormReport nu_norms(const FactorizedKernel& k);

/// Phase-space (Weyl symbol) evaluation of trace functionals:
///   16 pi^2 int r^2 dr int p^2 dp F(rho(r) g_hat(p), p).
struct PhaseSpaceNorms {
  double eta_norm = 0.0;   ///< calibration against the exact value
  double p_norm = 0.0;     ///< ||sinh eta - eta||
  double r_norm = 0.0;     ///< ||cosh eta - 1||
  double grad_eta2 = 0.0;  ///< ||grad_1 eta^(2)||
  double lap_eta2 = 0.0;
  double grad_eta3 = 0.0;
  double lap_eta3 = 0.0;
  double grad_p = 0.0;
  double lap_p = 0.0;
  double cross_gradient = 0.0;  ///< int dy dz |int dx grad eta(y;x) . grad eta(z;x)|^2
};

PhaseSpaceNorms phase_space_norms(const FactorizedKernel& k, std::size_t r_panels = 24,
                                  std::size_t p_panels_per_decade = 8);

/// Uniform cubic lattice restricted to the bulk of phi; the kernel is
/// discretised with ball-averaged cells so the matrix is a compression of
/// the continuum operator.
struct Lattice {
  int side = 0;
  double spacing = 0.0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> phi;
};

inline constexpr int kMaxLatticeSide = 16;

Lattice make_lattice(const gp::PhiInterpolant& phi, int side);
/// Matrix of the lattice operator (entries a^3 K(x_i, x_j)).
Eigen::MatrixXd lattice_matrix(const FactorizedKernel& k, const Lattice& lat);

struct PowerBoundReport {
  int n = 0;
  std::size_t samples = 0;
  double max_ratio = 0.0;  ///< |eta^(n)(x;y)| / (||eta_x|| ||eta_y|| ||eta||^{n-2})
  bool pass = false;
};

PowerBoundReport eta_power_bound(const FactorizedKernel& k, int n, std::size_t samples,
                                 unsigned seed, int side = 10);

struct HyperbolicKernels {
  Eigen::MatrixXd eta, sinh_k, cosh_minus_id, p_k;
  int series_depth = 0;
  double tail_bound = 0.0;
  double op_norm = 0.0;
  double hs_norm_p = 0.0;  ///< lattice HS norm of p_eta
  double hs_norm_r = 0.0;
  double sup_pointwise_p = 0.0;  ///< sup |p(x,y)| / (ell^alpha phi(x) phi(y)) over samples
  double sup_pointwise_r = 0.0;
  double cross_gradient = 0.0;   ///< lattice evaluation with the discrete Laplacian
};

HyperbolicKernels hyperbolic(const FactorizedKernel& k, double tol, int side = 10,
                             std::size_t samples = 100, unsigned seed = 7);

struct HnReport {
  std::vector<double> r;
  std::vector<double> h_N;
  double l2 = 0.0;
  double sup = 0.0;
  double young_bound = 0.0;       ///< ||U||_1 ||phi||_inf^3
  double integral_Vw = 0.0;       ///< int V w_ell
  double limit_defect_ell = 0.0;  ///< || h_N - (int V w_ell) phi^3 ||_2
  double limit_defect_full = 0.0; ///< || h_N - (int V - 8 pi a0) phi^3 ||_2
};

HnReport build_hN(const scattering::NeumannSolution& sol, const gp::GpState& phi, double a0);

}  // namespace gpregime::kernels
