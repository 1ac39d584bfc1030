#include "gpregime/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "gpregime/error.hpp"
#include "gpregime/numerics.hpp"

namespace gpregime::kernels {

using numerics::pi;
using numerics::sinc;

namespace {

constexpr std::size_t kTablePerDecade = 1000;

double p_max_of(const KernelG& G) { return 40.0 * G.N() / G.source().support_radius(); }

/// Geometric panels from a, each split so no piece is wider than `max_width`.
numerics::QuadratureRule oscillatory_rule(double a, double b, double first, double growth,
                                          double max_width) {
  numerics::QuadratureRule rule;
  double lo = a;
  double width = first;
  while (lo < b) {
    const double hi = std::min(b, lo + width);
    const auto pieces = static_cast<std::size_t>(std::ceil((hi - lo) / max_width));
    const double step = (hi - lo) / static_cast<double>(std::max<std::size_t>(pieces, 1));
    for (std::size_t k = 0; k < std::max<std::size_t>(pieces, 1); ++k)
      rule.append(lo + step * static_cast<double>(k), k + 1 >= pieces ? hi : lo + step * (k + 1.0));
    lo = hi;
    width *= growth;
  }
  return rule;
}

/// sinh t - t without cancellation.
double sinh_minus(double t) {
  if (std::abs(t) < 0.1) {
    const double t2 = t * t;
    return t * t2 / 6.0 * (1.0 + t2 / 20.0 * (1.0 + t2 / 42.0 * (1.0 + t2 / 72.0)));
  }
  return std::sinh(t) - t;
}

double cosh_minus(double t) {
  const double s = std::sinh(0.5 * t);
  return 2.0 * s * s;
}

/// Transform of rho = phi^2 on a Gauss rule in k, cut where it has decayed.
struct DensityTransform {
  numerics::QuadratureRule k;
  std::vector<double> rho_hat;
  double k_max = 0.0;
};

double rho_hat_at(const gp::PhiInterpolant& phi, double k) {
  const double rmax = phi.r_max();
  const auto panels = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(4.0 * k * rmax)));
  if (k == 0.0)
    return 4.0 * pi * numerics::integrate([&](double r) { return phi(r) * phi(r) * r * r; }, 0.0,
                                          rmax, panels);
  return 2.0 / k *
         numerics::integrate([&](double r) { return phi(r) * phi(r) * r * std::sin(2.0 * pi * k * r); },
                             0.0, rmax, panels);
}

DensityTransform density_transform(const gp::PhiInterpolant& phi) {
  DensityTransform d;
  const double rho0 = rho_hat_at(phi, 0.0);
  double k = 0.25;
  while (k < 6.0 && std::abs(rho_hat_at(phi, k)) > 1e-11 * rho0) k += 0.25;
  d.k_max = k;
  d.k = numerics::gauss_rule(0.0, k, 8);
  d.rho_hat.reserve(d.k.x.size());
  for (double kk : d.k.x) d.rho_hat.push_back(rho_hat_at(phi, kk));
  return d;
}

/// Radial convolution (f g_hat) * g_hat at |k| > 0 for g_hat supported in
/// [P, p_hi]:  (2 pi / k) int p f(p) g_hat(p) int_{|p-k|}^{p+k} q g_hat(q) dq dp.
double shell_convolution(const FactorizedKernel& K, const std::function<double(double)>& f, double k) {
  const double P = K.cut.P();
  const double p_hi = K.g_hat_table->p_hi();
  auto inner = [&](double p) {
    const double lo = std::max(std::abs(p - k), P);
    const double hi = std::min(p + k, p_hi);
    if (hi <= lo) return 0.0;
    return numerics::integrate([&](double q) { return q * K.g_hat(q); }, lo, hi, 1);
  };
  auto outer = [&](double p) { return p * f(p) * K.g_hat(p) * inner(p); };
  const double split = std::min(P + 2.0 * k, p_hi);
  double sum = numerics::integrate(outer, P, split, 4);
  sum += numerics::integrate_geometric(outer, split, p_hi, std::max(k, 0.02 * P), 1.15);
  return 2.0 * pi / k * sum;
}

double g_moment(const FactorizedKernel& K, const std::function<double(double)>& f) {
  const double P = K.cut.P();
  return 4.0 * pi *
         numerics::integrate_geometric([&](double p) { return p * p * f(K.g_hat(p)); }, P,
                                       K.g_hat_table->p_hi(), 0.02 * P, 1.15);
}

FactorizedKernel build_kernel(const KernelG& G, const gp::GpState& phi, const CutoffPair& cut,
                              bool left_is_phi) {
  FactorizedKernel k;
  k.G = std::make_shared<const KernelG>(G);
  k.phi = std::make_shared<const gp::PhiInterpolant>(phi);
  k.cut = cut;
  k.left_is_phi = left_is_phi;
  k.zero = G.is_zero();
  const double P = cut.P();
  const double p_hi = std::max(p_max_of(G), 10.0 * P);
  k.g_hat_table = std::make_shared<const MomentumTable>(G, P, p_hi, kTablePerDecade);
  const double p_lo = std::min(1e-3, 1e-3 * P);
  k.low_table = std::make_shared<const MomentumTable>(G, p_lo, P, kTablePerDecade);
  return k;
}

}  // namespace

double CutoffPair::P() const { return std::pow(ell, -alpha); }

double CutoffPair::g_L(double p) const {
  const double x = std::pow(ell, beta) * p;
  return std::exp(-x * x);
}

double CutoffPair::g_L_check(double r) const {
  const double s = std::pow(ell, -beta);
  const double x = pi * s * r;
  return std::pow(std::sqrt(pi) * s, 3) * std::exp(-x * x);
}

CutoffPair make_cutoff(double ell, double alpha, double beta) {
  require(std::isfinite(ell) && ell > 0.0 && ell < 1.0, ErrorKind::InvalidParameter,
          "ell must lie in (0, 1)");
  require(std::isfinite(alpha) && alpha > 0.0, ErrorKind::InvalidParameter, "alpha must be positive");
  require(std::isfinite(beta) && beta > 0.0 && beta < alpha, ErrorKind::InvalidParameter,
          "beta must lie in (0, alpha)");
  return CutoffPair{ell, alpha, beta};
}

GaussianLowpass build_gaussian_lowpass(double ell, double beta) {
  require(std::isfinite(ell) && ell > 0.0 && ell < 1.0, ErrorKind::InvalidParameter,
          "ell must lie in (0, 1)");
  require(std::isfinite(beta) && beta > 0.0, ErrorKind::InvalidParameter, "beta must be positive");
  GaussianLowpass out;
  out.cut = CutoffPair{ell, std::max(4.0, 2.0 * beta), beta};
  const double width = std::pow(ell, beta) / pi;
  const double r_end = 12.0 * width;
  out.l1_norm = 4.0 * pi * numerics::integrate([&](double r) { return out.cut.g_L_check(r) * r * r; },
                                               0.0, r_end, 64);
  const double l2sq = 4.0 * pi * numerics::integrate(
                                     [&](double r) {
                                       const double g = out.cut.g_L_check(r);
                                       return g * g * r * r;
                                     },
                                     0.0, r_end, 64);
  out.l2_norm = std::sqrt(l2sq);
  out.l2_closed_form = std::pow(pi, 1.5) * std::pow(2.0 * pi, -0.75) * std::pow(ell, -1.5 * beta);
  return out;
}

KernelG::KernelG(scattering::NeumannSolution sol) : sol_(std::move(sol)) {}

double KernelG::hat(double p) const {
  const double n = N();
  return -sol_.w_hat(std::abs(p) / n) / (n * n);
}

double KernelG::sup_p2_hat(std::size_t count) const {
  double best = 0.0;
  for (double q : scattering::default_p_grid(sol_, count)) {
    const double p = q * N();
    best = std::max(best, p * p * std::abs(hat(p)));
  }
  return best;
}

bool KernelG::is_zero() const { return sol_.potential().is_zero(); }

KernelG build_G(const scattering::NeumannSolution& sol) { return KernelG(sol); }

MomentumTable::MomentumTable(const KernelG& G, double p_lo, double p_hi, std::size_t per_decade)
    : p_lo_(p_lo), p_hi_(p_hi) {
  require(p_lo > 0.0 && p_hi > p_lo, ErrorKind::InvalidParameter, "momentum table needs 0 < p_lo < p_hi");
  const double t0 = std::log(p_lo);
  const double t1 = std::log(p_hi);
  const auto n = std::max<std::size_t>(
      8, static_cast<std::size_t>(std::ceil(std::log10(p_hi / p_lo) * static_cast<double>(per_decade))) + 1);
  const double dt = (t1 - t0) / static_cast<double>(n - 1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::exp(t0 + dt * static_cast<double>(i));
    y[i] = p * p * G.hat(p);
    if (!std::isfinite(y[i])) fail(ErrorKind::SolverFailure, "non-finite G_hat sample");
  }
  spline_ = std::make_shared<const boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      y.begin(), y.end(), t0, dt);
}

double MomentumTable::operator()(double p) const {
  p = std::abs(p);
  if (p < p_lo_ || p > p_hi_) return 0.0;
  return (*spline_)(std::log(p)) / (p * p);
}

double FactorizedKernel::g_hat(double p) const {
  p = std::abs(p);
  return p >= cut.P() ? (*g_hat_table)(p) : 0.0;
}

double FactorizedKernel::G_low(double r) const {
  r = std::abs(r);
  const double P = cut.P();
  const double p_lo = low_table->p_lo();
  const double max_width = r > 0.0 ? 0.5 / r : P;
  const auto rule = oscillatory_rule(p_lo, P, p_lo, 1.2, max_width);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double p = rule.x[i];
    sum += rule.w[i] * p * p * (*low_table)(p) * sinc(2.0 * pi * p * r);
  }
  // below p_lo the transform is flat
  sum += (*low_table)(p_lo) * p_lo * p_lo * p_lo / 3.0;
  return 4.0 * pi * sum;
}

double FactorizedKernel::g(double r) const {
  if (zero) return 0.0;
  return (*G)(r) - G_low(r);
}

double FactorizedKernel::operator()(const std::array<double, 3>& x, const std::array<double, 3>& y) const {
  const double d = std::hypot(x[0] - y[0], x[1] - y[1], x[2] - y[2]);
  const double rx = std::hypot(x[0], x[1], x[2]);
  const double ry = std::hypot(y[0], y[1], y[2]);
  return g(d) * u(rx) * v(ry);
}

FactorizedKernel build_eta_H(const KernelG& G, const gp::GpState& phi, const CutoffPair& cut) {
  return build_kernel(G, phi, cut, true);
}

FactorizedKernel build_nu_H(const KernelG& G, const gp::GpState& phi, const CutoffPair& cut) {
  return build_kernel(G, phi, cut, false);
}

double g_direct_3d(const FactorizedKernel& k, const std::array<double, 3>& d) {
  if (k.zero) return 0.0;
  const double r = std::hypot(d[0], d[1], d[2]);
  const double P = k.cut.P();
  // int_{|p|<P} G_hat(p) e^{2 pi i p.d} dp in spherical coordinates around d
  auto angular = [&](double p) {
    const auto pieces = static_cast<std::size_t>(std::ceil(2.0 * p * r)) + 1;
    return numerics::integrate([&](double mu) { return std::cos(2.0 * pi * p * r * mu); }, -1.0, 1.0,
                               pieces);
  };
  const double p_lo = std::min(1e-3, 1e-3 * P);
  const auto rule = oscillatory_rule(p_lo, P, p_lo, 1.2, r > 0.0 ? 0.5 / r : P);
  double low = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double p = rule.x[i];
    low += rule.w[i] * p * p * k.G->hat(p) * angular(p);
  }
  low = 2.0 * pi * low + 4.0 * pi * k.G->hat(p_lo) * p_lo * p_lo * p_lo / 3.0;
  return (*k.G)(r)-low;
}

NormReport eta_norms(const FactorizedKernel& k) {
  NormReport rep;
  if (k.zero) return rep;
  const auto& phi = *k.phi;
  const auto dens = density_transform(phi);
  rep.k_max = dens.k_max;
  const std::size_t m = dens.k.x.size();
  std::vector<double> S(m), S2(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double kk = dens.k.x[i];
    S[i] = shell_convolution(k, [](double) { return 1.0; }, kk);
    S2[i] = shell_convolution(k, [](double p) { return p * p; }, kk);
  }
  double eta2 = 0.0, grad_a = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double kk = dens.k.x[i];
    const double rh = dens.rho_hat[i];
    eta2 += dens.k.w[i] * S[i] * rh * rh * kk * kk;
    grad_a += dens.k.w[i] * 4.0 * pi * pi * S2[i] * rh * rh * kk * kk;
  }
  rep.eta_norm = std::sqrt(4.0 * pi * eta2);
  auto g2_rho = [&](double r) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double kk = dens.k.x[i];
      s += dens.k.w[i] * S[i] * dens.rho_hat[i] * kk * kk * sinc(2.0 * pi * kk * r);
    }
    return 4.0 * pi * s;
  };
  for (double r : numerics::linspace(0.0, phi.r_max(), 201))
    rep.sup_eta_x_ratio = std::max(rep.sup_eta_x_ratio, std::sqrt(std::max(0.0, g2_rho(r))));
  const double grad_b = numerics::integrate(
      [&](double r) {
        const double d = phi.derivative(r);
        return g2_rho(r) * d * d * r * r;
      },
      0.0, phi.r_max(), 32);
  rep.grad1_norm = std::sqrt(4.0 * pi * grad_a + 4.0 * pi * grad_b);
  const double N = k.G->N();
  rep.g_l2 = std::sqrt(g_moment(k, [](double g) { return g * g; }));
  rep.pointwise_ratio = g_moment(k, [](double g) { return std::abs(g); }) / N;
  rep.g0_over_N = g_moment(k, [](double g) { return g; }) / N;
  return rep;
}

NuNormReport nu_norms(const FactorizedKernel& k) {
  NuNormReport rep;
  if (k.zero) return rep;
  const auto& phi = *k.phi;
  const auto dens = density_transform(phi);
  const std::size_t m = dens.k.x.size();
  std::vector<double> S(m);
  for (std::size_t i = 0; i < m; ++i) S[i] = shell_convolution(k, [](double) { return 1.0; }, dens.k.x[i]);
  const double norm_phi = std::sqrt(dens.rho_hat.empty() ? 1.0 : rho_hat_at(phi, 0.0));
  const double g_l2 = std::sqrt(g_moment(k, [](double g) { return g * g; }));
  rep.nu_norm = g_l2 * norm_phi;
  rep.sup_nu_y_ratio = g_l2;
  for (double r : numerics::linspace(0.0, phi.r_max(), 201)) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double kk = dens.k.x[i];
      s += dens.k.w[i] * S[i] * dens.rho_hat[i] * kk * kk * sinc(2.0 * pi * kk * r);
    }
    rep.sup_nu_x = std::max(rep.sup_nu_x, std::sqrt(std::max(0.0, 4.0 * pi * s)));
  }
  const double P = k.cut.P();
  for (double p : numerics::logspace(P, k.g_hat_table->p_hi(), 400))
    rep.sup_p2_nu_slice = std::max(rep.sup_p2_nu_slice, p * p * std::abs(k.g_hat(p)));
  return rep;
}

PhaseSpaceNorms phase_space_norms(const FactorizedKernel& k, std::size_t r_panels,
                                  std::size_t p_panels_per_decade) {
  PhaseSpaceNorms out;
  if (k.zero) return out;
  const auto& phi = *k.phi;
  const auto rr = numerics::gauss_rule(0.0, phi.r_max(), r_panels);
  const double P = k.cut.P();
  const double growth = std::pow(10.0, 1.0 / static_cast<double>(std::max<std::size_t>(p_panels_per_decade, 1)));
  const auto pp = numerics::geometric_rule(P, k.g_hat_table->p_hi(), P * (growth - 1.0), growth);
  std::vector<double> gh(pp.x.size());
  for (std::size_t j = 0; j < pp.x.size(); ++j) gh[j] = k.g_hat(pp.x[j]);

  double eta = 0, pn = 0, rn = 0, ge2 = 0, le2 = 0, ge3 = 0, le3 = 0, gp_ = 0, lp = 0;
  const double c2 = 4.0 * pi * pi;
  for (std::size_t i = 0; i < rr.x.size(); ++i) {
    const double r = rr.x[i];
    const double rho = phi(r) * phi(r);
    const double wr = rr.w[i] * r * r;
    for (std::size_t j = 0; j < pp.x.size(); ++j) {
      const double p = pp.x[j];
      const double w = wr * pp.w[j] * p * p;
      const double t = rho * gh[j];
      const double t2 = t * t;
      const double sm = sinh_minus(t);
      const double cm = cosh_minus(t);
      const double p2 = c2 * p * p;
      eta += w * t2;
      pn += w * sm * sm;
      rn += w * cm * cm;
      ge2 += w * p2 * t2 * t2;
      le2 += w * p2 * p2 * t2 * t2;
      ge3 += w * p2 * t2 * t2 * t2;
      le3 += w * p2 * p2 * t2 * t2 * t2;
      gp_ += w * p2 * sm * sm;
      lp += w * p2 * p2 * sm * sm;
    }
  }
  const double c = 16.0 * pi * pi;
  out.eta_norm = std::sqrt(c * eta);
  out.p_norm = std::sqrt(c * pn);
  out.r_norm = std::sqrt(c * rn);
  out.grad_eta2 = std::sqrt(c * ge2);
  out.lap_eta2 = std::sqrt(c * le2);
  out.grad_eta3 = std::sqrt(c * ge3);
  out.lap_eta3 = std::sqrt(c * le3);
  out.grad_p = std::sqrt(c * gp_);
  out.lap_p = std::sqrt(c * lp);
  out.cross_gradient = c * le2;
  return out;
}

Lattice make_lattice(const gp::PhiInterpolant& phi, int side) {
  require(side >= 2, ErrorKind::InvalidParameter, "lattice side must be at least 2");
  require(side <= kMaxLatticeSide, ErrorKind::ResourceLimit,
          "lattice side " + std::to_string(side) + " exceeds the dense limit " +
              std::to_string(kMaxLatticeSide));
  const double phi0 = phi(0.0);
  require(phi0 > 0.0, ErrorKind::InvalidInput, "phi(0) must be positive");
  double rb = 0.0;
  while (rb < phi.r_max() && phi(rb) > 1e-2 * phi0) rb += 0.01;
  Lattice lat;
  lat.side = side;
  lat.spacing = 2.0 * rb / side;
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      for (int l = 0; l < side; ++l) {
        const std::array<double, 3> x{-rb + lat.spacing * (i + 0.5), -rb + lat.spacing * (j + 0.5),
                                      -rb + lat.spacing * (l + 0.5)};
        lat.points.push_back(x);
        lat.phi.push_back(phi(std::hypot(x[0], x[1], x[2])));
      }
  return lat;
}

Eigen::MatrixXd lattice_matrix(const FactorizedKernel& k, const Lattice& lat) {
  const auto n = static_cast<Eigen::Index>(lat.points.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  if (k.zero) return M;
  const double a = lat.spacing;
  const double vol = a * a * a;
  // self term: integral of g over the ball with the cell's volume
  const double rc = a * std::cbrt(3.0 / (4.0 * pi));
  const double P = k.cut.P();
  const double p_cut = std::min(k.g_hat_table->p_hi(), P + 2e4 / rc);
  const double self =
      4.0 * pi * vol *
      numerics::integrate(
          [&](double p) {
            const double t = 2.0 * pi * p * rc;
            const double ball = 3.0 * (std::sin(t) - t * std::cos(t)) / (t * t * t);
            return p * p * k.g_hat(p) * ball;
          },
          P, p_cut, static_cast<std::size_t>(std::ceil(2.0 * (p_cut - P) * rc)) + 1);
  std::map<int, double> by_offset;
  const int s = lat.side;
  auto idx = [s](Eigen::Index i) { return std::array<int, 3>{int(i / (s * s)), int(i / s % s), int(i % s)}; };
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ci = idx(i);
    const double ui = k.left_is_phi ? lat.phi[i] : 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto cj = idx(j);
      const int d2 = (ci[0] - cj[0]) * (ci[0] - cj[0]) + (ci[1] - cj[1]) * (ci[1] - cj[1]) +
                     (ci[2] - cj[2]) * (ci[2] - cj[2]);
      double gv;
      if (d2 == 0) {
        gv = self / vol;
      } else {
        auto it = by_offset.find(d2);
        if (it == by_offset.end()) it = by_offset.emplace(d2, k.g(a * std::sqrt(double(d2)))).first;
        gv = it->second;
      }
      M(i, j) = vol * ui * lat.phi[j] * gv;
    }
  }
  return M;
}

PowerBoundReport eta_power_bound(const FactorizedKernel& k, int n, std::size_t samples, unsigned seed,
                                 int side) {
  require(n >= 2, ErrorKind::InvalidParameter, "power must be at least 2");
  require(samples > 0, ErrorKind::InvalidParameter, "need at least one sample");
  const auto lat = make_lattice(*k.phi, side);
  const Eigen::MatrixXd M = lattice_matrix(k, lat);
  Eigen::MatrixXd Mn = M;
  for (int i = 1; i < n; ++i) Mn = Mn * M;
  const Eigen::VectorXd rows = M.rowwise().norm();
  const double hs = M.norm();
  std::mt19937 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, M.rows() - 1);
  PowerBoundReport rep;
  rep.n = n;
  rep.samples = samples;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto i = pick(rng);
    const auto j = pick(rng);
    const double bound = rows[i] * rows[j] * std::pow(hs, n - 2);
    const double value = std::abs(Mn(i, j));
    if (bound > 0.0) rep.max_ratio = std::max(rep.max_ratio, value / bound);
    else if (value > 0.0) rep.max_ratio = std::numeric_limits<double>::infinity();
  }
  rep.pass = rep.max_ratio <= 1.0 + 1e-12;
  return rep;
}

HyperbolicKernels hyperbolic(const FactorizedKernel& k, double tol, int side, std::size_t samples,
                             unsigned seed) {
  require(tol > 0.0, ErrorKind::InvalidParameter, "tolerance must be positive");
  const auto lat = make_lattice(*k.phi, side);
  HyperbolicKernels h;
  h.eta = lattice_matrix(k, lat);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.eta, Eigen::EigenvaluesOnly);
  h.op_norm = es.eigenvalues().cwiseAbs().maxCoeff();
  require(h.eta.norm() < 1.0, ErrorKind::InvalidRegime,
          "series requires ||eta|| < 1, got " + std::to_string(h.eta.norm()));
  const auto n = h.eta.rows();
  h.sinh_k = Eigen::MatrixXd::Zero(n, n);
  h.cosh_minus_id = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd term = h.eta;
  double term_bound = h.op_norm;
  int m = 1;
  while (true) {
    if (m % 2 == 1) h.sinh_k += term;
    else h.cosh_minus_id += term;
    // remainder of the exponential series after degree m
    h.tail_bound = term_bound * h.op_norm / (m + 1.0) * std::exp(h.op_norm);
    if ((h.tail_bound < tol && m >= 5) || m >= 200) break;
    ++m;
    term = term * h.eta / static_cast<double>(m);
    term_bound *= h.op_norm / m;
  }
  h.series_depth = m;
  h.p_k = h.sinh_k - h.eta;
  h.hs_norm_p = h.p_k.norm();
  h.hs_norm_r = h.cosh_minus_id.norm();

  const double vol = std::pow(lat.spacing, 3);
  const double scale = std::pow(k.cut.ell, k.cut.alpha);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto i = pick(rng);
    const auto j = pick(rng);
    const double w = vol * scale * lat.phi[i] * lat.phi[j];
    h.sup_pointwise_p = std::max(h.sup_pointwise_p, std::abs(h.p_k(i, j)) / w);
    h.sup_pointwise_r = std::max(h.sup_pointwise_r, std::abs(h.cosh_minus_id(i, j)) / w);
  }

  // discrete -Laplacian with Dirichlet walls
  const int sd = lat.side;
  const double inv_a2 = 1.0 / (lat.spacing * lat.spacing);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int x = int(i / (sd * sd)), y = int(i / sd % sd), z = int(i % sd);
    lap(i, i) = 6.0 * inv_a2;
    const int c[3] = {x, y, z};
    const Eigen::Index stride[3] = {Eigen::Index(sd) * sd, sd, 1};
    for (int ax = 0; ax < 3; ++ax) {
      if (c[ax] > 0) lap(i, i - stride[ax]) = -inv_a2;
      if (c[ax] + 1 < sd) lap(i, i + stride[ax]) = -inv_a2;
    }
  }
  const Eigen::MatrixXd cross = h.eta * lap * h.eta;
  h.cross_gradient = cross.squaredNorm();
  return h;
}

HnReport build_hN(const scattering::NeumannSolution& sol, const gp::GpState& state, double a0) {
  HnReport rep;
  const gp::PhiInterpolant phi(state);
  const auto& v = sol.potential();
  const double N = sol.N_param;
  const double R = sol.support_radius();
  const double s_end = R / N;
  auto U = [&](double s) { return N * N * N * v(N * s) * sol.w(N * s); };
  auto rho = [&](double t) { return phi(t) * phi(t); };
  const double u_l1 =
      4.0 * pi * numerics::integrate([&](double s) { return std::abs(U(s)) * s * s; }, 0.0, s_end, 8);
  rep.integral_Vw = sol.integral_Vw();
  double phi_sup = 0.0;
  for (double p : state.phi) phi_sup = std::max(phi_sup, std::abs(p));
  phi_sup = std::max(phi_sup, std::abs(phi(0.0)));
  rep.young_bound = u_l1 * phi_sup * phi_sup * phi_sup;
  const double c_full = 4.0 * pi * numerics::integrate([&](double r) { return v(r) * r * r; }, 0.0, R, 8) -
                        8.0 * pi * a0;

  double l2 = 0.0, d_ell = 0.0, d_full = 0.0;
  for (std::size_t i = 0; i < state.r.size(); ++i) {
    const double r = state.r[i];
    double conv;
    if (v.is_zero()) {
      conv = 0.0;
    } else {
      conv = 2.0 * pi / r *
             numerics::integrate(
                 [&](double s) {
                   const double inner =
                       numerics::integrate([&](double t) { return t * rho(t); }, std::abs(r - s), r + s, 1);
                   return s * U(s) * inner;
                 },
                 0.0, s_end, 8);
    }
    const double ph = state.phi[i];
    const double hv = conv * ph;
    rep.r.push_back(r);
    rep.h_N.push_back(hv);
    rep.sup = std::max(rep.sup, std::abs(hv));
    const double w = 4.0 * pi * r * r * state.h;
    l2 += w * hv * hv;
    const double e1 = hv - rep.integral_Vw * ph * ph * ph;
    const double e2 = hv - c_full * ph * ph * ph;
    d_ell += w * e1 * e1;
    d_full += w * e2 * e2;
  }
  rep.l2 = std::sqrt(l2);
  rep.limit_defect_ell = std::sqrt(d_ell);
  rep.limit_defect_full = std::sqrt(d_full);
  return rep;
}

}  // namespace gpregime::kernels
