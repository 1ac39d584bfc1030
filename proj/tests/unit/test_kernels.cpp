#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gpregime/error.hpp"
#include "gpregime/kernels.hpp"

using namespace gpregime;
using std::numbers::pi;

namespace {

double gk(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
          unsigned depth = 15) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, depth, tol);
}

// integral over [a, b] split at decades, for integrands living on many scales
double gk_decades(const std::function<double(double)>& f, double a, double b) {
  double s = 0.0;
  for (double lo = a; lo < b; lo *= 10.0) s += gk(f, lo, std::min(b, 10.0 * lo), 1e-7, 6);
  return s;
}

struct Fixture {
  potentials::InteractionPotential v = potentials::make_square_well(2.0, 1.0, 2001);
  potentials::TrapPotential trap = potentials::make_trap(potentials::TrapKind::Harmonic, 2048, 12.0);
  gp::GpState gauss = gp::minimize_gp(trap, 0.0, gp::default_grid(trap));
  double ell = 0.5, N = 200.0;
  scattering::NeumannSolution sol = scattering::solve_neumann(v, ell, N, 1024);
  kernels::KernelG G = kernels::build_G(sol);
  kernels::CutoffPair cut = kernels::make_cutoff(ell, 4.0, 2.0);
  kernels::FactorizedKernel eta = kernels::build_eta_H(G, gauss, cut);
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("cutoff pair") {
    const auto c = kernels::make_cutoff(0.5, 4.0, 2.0);
    CHECK(c.P() == doctest::Approx(16.0));
    CHECK(c.chi_H(16.0) == 1.0);
    CHECK(c.chi_H(15.9) == 0.0);
    CHECK(c.chi_Hc(3.0) == 1.0);
    CHECK(c.g_L(0.0) == 1.0);
    CHECK(c.g_L(2.0) == doctest::Approx(std::exp(-0.25)));
  }

  TEST_CASE("Gaussian low-pass norms by Plancherel") {
    for (double ell : {0.5, 0.25}) {
      const auto g = kernels::build_gaussian_lowpass(ell, 2.0);
      CHECK(g.l1_norm == doctest::Approx(1.0).epsilon(1e-10));
      const double l2sq = gk([&](double p) {
        const double x = g.cut.g_L(p);
        return 4 * pi * x * x * p * p;
      }, 0.0, 20.0 / std::pow(ell, 2.0));
      CHECK(g.l2_norm == doctest::Approx(std::sqrt(l2sq)).epsilon(1e-8));
      CHECK(g.l2_closed_form == doctest::Approx(std::sqrt(l2sq)).epsilon(1e-8));
    }
  }

  TEST_CASE("G_hat is the rescaled w_hat") {
    const auto& f = fx();
    for (double p : {1.0, 20.0, 300.0}) {
      CHECK(f.G.hat(p) == doctest::Approx(-f.sol.w_hat(p / f.N) / (f.N * f.N)).epsilon(1e-12));
    }
    CHECK(f.G(0.001) == doctest::Approx(-f.N * f.sol.w(f.N * 0.001)));
    CHECK_FALSE(f.G.is_zero());
  }

  TEST_CASE("momentum table interpolates G_hat") {
    const auto& f = fx();
    const kernels::MomentumTable t(f.G, 1.0, 1e4, 1000);
    // the spline carries p^2 G_hat, so compare on that scale
    double sup = 0.0;
    for (double p : {1.0, 10.0, 100.0, 1000.0}) sup = std::max(sup, p * p * std::abs(f.G.hat(p)));
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int i = 0; i < 20; ++i) {
      const double p = std::pow(10.0, u(rng));
      CHECK(p * p * std::abs(t(p) - f.G.hat(p)) <= 1e-5 * sup);
    }
    CHECK(t(0.5) == 0.0);
    CHECK(t(2e4) == 0.0);
  }

  TEST_CASE("factorised radial kernel matches the direct three-dimensional evaluation") {
    const auto& f = fx();
    for (double r : {0.002, 0.01, 0.05, 0.2}) {
      const std::array<double, 3> d{r, 0.0, 0.0};
      const double a = f.eta.g(r), b = kernels::g_direct_3d(f.eta, d);
      CHECK(a == doctest::Approx(b).epsilon(1e-4).scale(1e-6 * std::abs(f.eta.g(0.002))));
    }
  }

  TEST_CASE("||g||_2 by Plancherel and ||nu_H|| = ||g||_2 ||phi||_2") {
    const auto& f = fx();
    const double P = f.cut.P();
    // same momentum truncation as the kernel table; direct G_hat, no spline
    const double l2sq = gk_decades([&](double p) {
      const double x = f.G.hat(p);
      return 4 * pi * x * x * p * p;
    }, P, f.eta.g_hat_table->p_hi());
    const auto rep = kernels::eta_norms(f.eta);
    CHECK(rep.g_l2 == doctest::Approx(std::sqrt(l2sq)).epsilon(1e-3));
    const auto nu = kernels::nu_norms(kernels::build_nu_H(f.G, f.gauss, f.cut));
    CHECK(nu.nu_norm == doctest::Approx(rep.g_l2).epsilon(1e-3));
  }

  TEST_CASE("||eta_H|| against the Gaussian autoconvolution") {
    // phi^2 * phi^2 = (2 pi)^{-3/2} e^{-r^2/2} for the oscillator ground state
    const auto& f = fx();
    const double ref2 = gk_decades([&](double r) {
      const double g = f.eta.g(r);
      return 4 * pi * g * g * std::pow(2 * pi, -1.5) * std::exp(-0.5 * r * r) * r * r;
    }, 1e-7, 12.0);
    const auto rep = kernels::eta_norms(f.eta);
    CHECK(rep.eta_norm == doctest::Approx(std::sqrt(ref2)).epsilon(2e-3));
    CHECK(rep.sup_eta_x_ratio > 0.0);
    CHECK(rep.grad1_norm > rep.eta_norm);
  }

  TEST_CASE("phase-space calibration is close to the exact norm") {
    const auto& f = fx();
    const auto ps = kernels::phase_space_norms(f.eta);
    const auto rep = kernels::eta_norms(f.eta);
    CHECK(ps.eta_norm == doctest::Approx(rep.eta_norm).epsilon(0.05));
    CHECK(ps.p_norm < ps.r_norm);
  }

  TEST_CASE("lattice sinh and cosh against an eigendecomposition") {
    const auto& f = fx();
    const auto h = kernels::hyperbolic(f.eta, 1e-14, 6, 20, 7);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.eta);
    const auto& Q = es.eigenvectors();
    const Eigen::VectorXd lam = es.eigenvalues();
    const Eigen::MatrixXd sh = Q * lam.array().sinh().matrix().asDiagonal() * Q.transpose();
    const Eigen::MatrixXd ch = Q * (lam.array().cosh() - 1.0).matrix().asDiagonal() * Q.transpose();
    const double scale = h.eta.cwiseAbs().maxCoeff();
    CHECK((h.sinh_k - sh).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    CHECK((h.cosh_minus_id - ch).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    CHECK((h.p_k - (sh - h.eta)).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    CHECK(h.series_depth >= 5);
    CHECK(h.eta.isApprox(h.eta.transpose()));
  }

  TEST_CASE("kernel power bound") {
    const auto r = kernels::eta_power_bound(fx().eta, 2, 30, 11, 6);
    CHECK(r.pass);
    CHECK(r.max_ratio <= 1.0);
  }

  TEST_CASE("h_N satisfies Young's inequality") {
    const auto& f = fx();
    const auto h = kernels::build_hN(f.sol, f.gauss, 1.0 - std::tanh(1.0));
    CHECK(h.sup <= h.young_bound * (1 + 1e-12));
    CHECK(h.l2 > 0.0);
    CHECK(std::isfinite(h.limit_defect_full));
  }

  TEST_CASE("lattice size is capped") {
    const gp::PhiInterpolant phi(fx().gauss);
    CHECK(kernels::make_lattice(phi, 4).points.size() <= 64);
    CHECK_THROWS_AS(kernels::make_lattice(phi, kernels::kMaxLatticeSide + 1), Error);
  }

  TEST_CASE("zero interaction gives zero kernels") {
    const auto& f = fx();
    const auto v0 = potentials::make_square_well(0.0, 1.0, 101);
    const auto sol = scattering::solve_neumann(v0, 0.5, 200, 1024);
    const auto G = kernels::build_G(sol);
    CHECK(G.is_zero());
    const auto k = kernels::build_eta_H(G, f.gauss, f.cut);
    CHECK(k.zero);
    const auto rep = kernels::eta_norms(k);
    CHECK(rep.eta_norm == 0.0);
    CHECK(rep.grad1_norm == 0.0);
    const auto ps = kernels::phase_space_norms(k);
    CHECK(ps.p_norm == 0.0);
    CHECK(kernels::build_hN(sol, f.gauss, 0.0).l2 == 0.0);
  }
}
