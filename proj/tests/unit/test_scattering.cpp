#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "gpregime/error.hpp"
#include "gpregime/scattering.hpp"

using namespace gpregime;
using std::numbers::pi;

namespace {

// a0 = R - u(R)/u'(R) for -u'' + V/2 u = 0, by adaptive Dormand-Prince.
double a0_odeint(const potentials::InteractionPotential& v) {
  using State = std::array<double, 2>;
  State y{0.0, 1.0};
  namespace ode = boost::numeric::odeint;
  auto rhs = [&](const State& s, State& d, double r) {
    d[0] = s[1];
    d[1] = 0.5 * v(r) * s[0];
  };
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-13), rhs, y,
                          0.0, v.support_radius, 1e-4);
  return v.support_radius - y[0] / y[1];
}

// Square well Neumann problem in closed form: sinh inside, trig outside.
struct WellNeumann {
  double V0, R, L;
  double q(double lam) const { return std::sqrt(0.5 * V0 - lam); }
  // u and u' at r for eigenvalue lam (unnormalised)
  std::pair<double, double> u(double lam, double r) const {
    const double qq = q(lam);
    if (r <= R) return {std::sinh(qq * r), qq * std::cosh(qq * r)};
    const double k = std::sqrt(lam);
    const double B = std::sinh(qq * R), A = qq * std::cosh(qq * R) / k;
    const double t = k * (r - R);
    return {A * std::sin(t) + B * std::cos(t), k * (A * std::cos(t) - B * std::sin(t))};
  }
  double neumann(double lam) const {
    const auto [uL, duL] = u(lam, L);
    return duL * L - uL;
  }
  double f(double lam, double r) const {
    const double inner = r < 1e-8 ? q(lam) : u(lam, r).first / r;
    return inner / (u(lam, L).first / L);
  }
};

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-12);
}

}  // namespace

TEST_SUITE("scattering") {
  TEST_CASE("square well scattering length closed form") {
    // kappa = sqrt(V0/2); a0 = R - tanh(kappa R)/kappa
    for (auto [V0, R] : {std::pair{2.0, 1.0}, std::pair{8.0, 0.5}, std::pair{0.5, 2.0}}) {
      const auto v = potentials::make_square_well(V0, R, 2001);
      const auto s = scattering::solve_zero_energy(v, 40.0, 4096);
      const double kappa = std::sqrt(V0 / 2.0);
      const double ref = R - std::tanh(kappa * R) / kappa;
      CHECK(s.a0 == doctest::Approx(ref).epsilon(1e-10));
      CHECK(s.a0_matching == doctest::Approx(ref).epsilon(1e-10));
      CHECK(s.identity_defect() < 1e-8);
    }
  }

  TEST_CASE("smooth bump scattering length against an independent ODE solve") {
    const auto v = potentials::make_smooth_bump(5.0, 1.2, 4001);
    const auto s = scattering::solve_zero_energy(v, 40.0, 4096);
    CHECK(s.a0 == doctest::Approx(a0_odeint(v)).epsilon(1e-8));
    CHECK(s.identity_defect() < 1e-6);
  }

  TEST_CASE("f is increasing towards 1 - a0/r") {
    const auto v = potentials::make_square_well(2.0, 1.0, 2001);
    const auto s = scattering::solve_zero_energy(v, 40.0, 4096);
    for (std::size_t i = 1; i < s.f.size(); ++i) CHECK(s.f[i] >= s.f[i - 1] - 1e-14);
    const double r = s.r_grid.back();
    CHECK(s.f.back() == doctest::Approx(1.0 - s.a0 / r).epsilon(1e-9));
  }

  TEST_CASE("zero potential has zero scattering length") {
    const auto v = potentials::make_square_well(0.0, 1.0, 101);
    const auto s = scattering::solve_zero_energy(v, 20.0, 1024);
    CHECK(s.a0 == 0.0);
    const auto n = scattering::solve_neumann(v, 0.5, 100, 1024);
    CHECK(n.lambda_ell == 0.0);
    CHECK(n.w(0.3) == 0.0);
    CHECK(n.w_hat(0.2) == 0.0);
  }

  TEST_CASE("square well Neumann eigenvalue against the transcendental equation") {
    const double V0 = 2.0, R = 1.0, ell = 0.5, N = 100.0;
    const WellNeumann ref{V0, R, N * ell};
    const auto sol = scattering::solve_neumann(potentials::make_square_well(V0, R, 2001), ell, N, 1024);

    const double a0 = R - std::tanh(1.0);
    const double guess = 3.0 * a0 / std::pow(N * ell, 3);
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(
        [&](double l) { return ref.neumann(l); }, 0.5 * guess, 2.0 * guess,
        boost::math::tools::eps_tolerance<double>(50), iters);
    const double lam = 0.5 * (root.first + root.second);

    CHECK(sol.lambda_ell == doctest::Approx(lam).epsilon(1e-9));
    CHECK(sol.radius == N * ell);
    CHECK(std::abs(sol.neumann_defect()) < 1e-9);
    for (double r : {0.25, 0.9, 3.0, 20.0, 49.0}) CHECK(sol.f(r) == doctest::Approx(ref.f(lam, r)).epsilon(1e-8));
    CHECK(sol.f(N * ell) == doctest::Approx(1.0));
    CHECK(sol.min_u() > 0.0);
  }

  TEST_CASE("lambda_ell approaches 3 a0 / (N ell)^3") {
    const auto v = potentials::make_square_well(2.0, 1.0, 2001);
    const double a0 = 1.0 - std::tanh(1.0);
    const auto s100 = scattering::solve_neumann(v, 0.5, 200, 1024);
    const auto s400 = scattering::solve_neumann(v, 0.5, 800, 1024);
    const double d100 = std::abs(s100.lambda_ell * std::pow(100.0, 3) / (3 * a0) - 1.0);
    const double d400 = std::abs(s400.lambda_ell * std::pow(400.0, 3) / (3 * a0) - 1.0);
    CHECK(d100 < 0.01);
    CHECK(d400 < d100 / 3.0);
  }

  TEST_CASE("w_hat against direct quadrature of the closed-form profile") {
    const double V0 = 2.0, R = 1.0, ell = 0.5, N = 60.0;
    const auto sol = scattering::solve_neumann(potentials::make_square_well(V0, R, 2001), ell, N, 1024);
    const double L = N * ell;
    const WellNeumann ref{V0, R, L};
    const double lam = sol.lambda_ell;
    auto w = [&](double r) { return 1.0 - ref.f(lam, r); };

    const double vol = gk([&](double r) { return 4 * pi * w(r) * r * r; }, 0.0, R) +
                       gk([&](double r) { return 4 * pi * w(r) * r * r; }, R, L);
    CHECK(sol.integral_w() == doctest::Approx(vol).epsilon(1e-8));
    CHECK(sol.w_hat(0.0) == doctest::Approx(vol).epsilon(1e-8));

    for (double p : {0.003, 0.05, 0.7, 3.0}) {
      auto integrand = [&](double r) { return w(r) * r * std::sin(2 * pi * p * r); };
      double direct = gk(integrand, 0.0, R);
      // split the outer interval into half periods
      const double step = std::min(L - R, 0.5 / p);
      for (double a = R; a < L; a += step) direct += gk(integrand, a, std::min(L, a + step));
      direct *= 2.0 / p;
      CHECK(sol.w_hat(p) == doctest::Approx(direct).epsilon(1e-6).scale(1e-6 * std::abs(vol)));
    }
  }

  TEST_CASE("integral of V f_ell tends to 8 pi a0") {
    const auto v = potentials::make_square_well(2.0, 1.0, 2001);
    const double a0 = 1.0 - std::tanh(1.0);
    const auto sol = scattering::solve_neumann(v, 0.5, 400, 1024);
    CHECK(std::abs(sol.integral_Vf() - 8 * pi * a0) / (8 * pi * a0) < 0.05);
    CHECK(sol.integral_Vf() + sol.integral_Vw() == doctest::Approx(4 * pi * 2.0 / 3.0).epsilon(1e-9));
  }

  TEST_CASE("rescaled solution") {
    const auto sol = scattering::solve_neumann(potentials::make_square_well(2.0, 1.0, 2001), 0.5, 100, 1024);
    const auto rs = scattering::rescale(sol);
    CHECK(rs.chi_radius == 0.5);
    CHECK(rs(0.01) == doctest::Approx(sol.f(1.0)));
    CHECK(rs(0.7) == 1.0);
    CHECK(rs.residual < 1e-6);
  }

  TEST_CASE("invalid domains") {
    const auto v = potentials::make_square_well(2.0, 1.0, 2001);
    try {
      scattering::solve_neumann(v, 0.5, 1.5, 1024);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidDomain);
    }
    CHECK_THROWS_AS(scattering::solve_neumann(v, 1.5, 100, 1024), Error);
    CHECK_THROWS_AS(scattering::solve_zero_energy(v, 40.0, 16), Error);
  }
}
