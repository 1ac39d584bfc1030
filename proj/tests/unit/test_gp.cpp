#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "gpregime/error.hpp"
#include "gpregime/gp.hpp"

using namespace gpregime;
using std::numbers::pi;

namespace {

const potentials::TrapPotential& harmonic() {
  static const auto t = potentials::make_trap(potentials::TrapKind::Harmonic, 2048, 12.0);
  return t;
}

double gaussian(double r) { return std::pow(pi, -0.75) * std::exp(-0.5 * r * r); }

const gp::GpState& minimizer(double a0) {
  static std::map<double, gp::GpState> cache;
  auto it = cache.find(a0);
  if (it == cache.end())
    it = cache.emplace(a0, gp::minimize_gp(harmonic(), a0, gp::default_grid(harmonic()), {1e-10})).first;
  return it->second;
}

}  // namespace

TEST_SUITE("gp") {
  TEST_CASE("non-interacting harmonic ground state is the Gaussian") {
    const auto& s = minimizer(0.0);
    CHECK(s.energy.total == doctest::Approx(3.0).epsilon(1e-6));
    // equipartition for the oscillator ground state
    CHECK(s.energy.kinetic == doctest::Approx(1.5).epsilon(1e-5));
    CHECK(s.energy.trap == doctest::Approx(1.5).epsilon(1e-5));
    CHECK(s.energy.interaction == 0.0);
    CHECK(s.eps_gp == doctest::Approx(3.0).epsilon(1e-6));
    double err = 0.0;
    for (std::size_t i = 0; i < s.r.size(); ++i) err = std::max(err, std::abs(s.phi[i] - gaussian(s.r[i])));
    CHECK(err < 1e-5);
    CHECK(s.norm == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("virial identity 2K - 2T + 3I = 0 for the interacting minimiser") {
    const auto& s = minimizer(0.25);
    const auto& e = s.energy;
    const double virial = 2 * e.kinetic - 2 * e.trap + 3 * e.interaction;
    CHECK(std::abs(virial) < 1e-6 * e.total);
    CHECK(e.interaction > 0.0);
    CHECK(e.total > 3.0);
  }

  TEST_CASE("Euler-Lagrange residual and multiplier identity") {
    const auto& s = minimizer(0.25);
    CHECK(s.residual <= 1e-8);
    CHECK(gp::el_residual(s) == doctest::Approx(s.residual).epsilon(1e-6).scale(1e-12));
    CHECK(s.eps_gp == doctest::Approx(s.energy.total + 4 * pi * 0.25 * s.phi4).epsilon(1e-12));
    CHECK(s.rayleigh == doctest::Approx(s.eps_gp).epsilon(1e-8));
  }

  TEST_CASE("energy is minimal under normalised perturbations") {
    const auto& s = minimizer(0.25);
    for (double amp : {1e-2, -1e-2, 1e-3}) {
      auto chi = s.chi;
      double nrm = 0.0;
      for (std::size_t i = 0; i < chi.size(); ++i) {
        chi[i] += amp * s.r[i] * s.r[i] * std::exp(-s.r[i] * s.r[i]);
        nrm += chi[i] * chi[i];
      }
      nrm = std::sqrt(4 * pi * s.h * nrm);
      for (auto& c : chi) c /= nrm;
      CHECK(gp::energy_of(s, chi).total > s.energy.total);
    }
  }

  TEST_CASE("energy is increasing in a0") {
    CHECK(minimizer(0.25).energy.total > minimizer(0.0).energy.total);
    CHECK(minimizer(0.5).energy.total > minimizer(0.25).energy.total);
  }

  TEST_CASE("oscillator s-wave spectrum") {
    const auto& s = minimizer(0.0);
    const auto sp = gp::hgp_spectrum(s, harmonic(), 3);
    REQUIRE(sp.eigenvalues.size() == 3);
    // s-wave levels 3, 7, 11 shifted by eps = 3
    CHECK(sp.eigenvalues[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(sp.eigenvalues[1] == doctest::Approx(4.0).epsilon(1e-4));
    CHECK(sp.eigenvalues[2] == doctest::Approx(8.0).epsilon(1e-4));
    CHECK(sp.overlaps[0] >= 1.0 - 1e-8);
  }

  TEST_CASE("interacting spectrum has phi as zero mode") {
    const auto& s = minimizer(0.25);
    const auto sp = gp::hgp_spectrum(s, harmonic(), 2);
    CHECK(std::abs(sp.eigenvalues[0]) <= 1e-6 * sp.eigenvalues[1]);
    CHECK(sp.gap > 0.0);
    CHECK(sp.overlaps[0] >= 1.0 - 1e-8);
  }

  TEST_CASE("Fourier transform of the Gaussian") {
    const auto& s = minimizer(0.0);
    // pi^{-3/4} e^{-r^2/2} -> pi^{-3/4} (2 pi)^{3/2} e^{-2 pi^2 p^2}
    for (double p : {0.0, 0.1, 0.3, 0.6}) {
      const double ref = std::pow(pi, -0.75) * std::pow(2 * pi, 1.5) * std::exp(-2 * pi * pi * p * p);
      CHECK(gp::phi_hat(s, p) == doctest::Approx(ref).epsilon(1e-5).scale(1e-8));
    }
  }

  TEST_CASE("decay constants are finite and grow with nu") {
    const auto& s = minimizer(0.25);
    const auto d1 = gp::verify_decay(s, 1.0);
    const auto d2 = gp::verify_decay(s, 2.0);
    CHECK(d1.pass);
    CHECK(d2.pass);
    CHECK(std::isfinite(d2.c_laplacian));
    CHECK(d2.c_phi >= d1.c_phi);
  }

  TEST_CASE("make_state normalises and reports the Gaussian energy") {
    const auto s = gp::make_state(harmonic(), 0.0, gp::default_grid(harmonic()),
                                  [](double r) { return 5.0 * std::exp(-0.5 * r * r); });
    CHECK(s.norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.energy.total == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(s.residual < 1e-5);
    CHECK(s.phi_at(0.0) == doctest::Approx(std::pow(pi, -0.75)).epsilon(1e-6));
  }

  TEST_CASE("quartic trap minimiser converges") {
    const auto t = potentials::make_trap(potentials::TrapKind::Quartic, 2048, 8.0);
    const auto s = gp::minimize_gp(t, 0.1, gp::default_grid(t));
    CHECK(s.residual <= 1e-8);
    // virial for r^4: 2K - 4T + 3I = 0
    const auto& e = s.energy;
    CHECK(std::abs(2 * e.kinetic - 4 * e.trap + 3 * e.interaction) < 1e-5 * e.total);
  }

  TEST_CASE("negative scattering length is rejected") {
    CHECK_THROWS_AS(gp::minimize_gp(harmonic(), -0.1, gp::default_grid(harmonic())), Error);
  }
}
