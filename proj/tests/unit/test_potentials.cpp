#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gpregime/error.hpp"
#include "gpregime/potentials.hpp"

using namespace gpregime;
using namespace gpregime::potentials;
using std::numbers::pi;

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

}  // namespace

TEST_SUITE("potentials") {
  TEST_CASE("square well values and L3 norm") {
    const auto v = make_square_well(2.0, 1.0, 2001);
    CHECK(v(0.3) == 2.0);
    CHECK(v(1.5) == 0.0);
    CHECK(v.support_radius == 1.0);
    // (4 pi/3 R^3)^{1/3} V0
    CHECK(v.l3_norm == doctest::Approx(2.0 * std::cbrt(4.0 * pi / 3.0)).epsilon(1e-6));
    CHECK(validate(v).all_pass());
  }

  TEST_CASE("smooth bump L3 norm against independent quadrature") {
    const double v0 = 3.0, R = 1.5;
    const auto v = make_smooth_bump(v0, R, 4001);
    const double ref = std::cbrt(gk(
        [&](double r) {
          const double s = 1.0 - r * r / (R * R);
          const double x = v0 * s * s;
          return 4.0 * pi * x * x * x * r * r;
        },
        0.0, R));
    CHECK(v.l3_norm == doctest::Approx(ref).epsilon(1e-5));
    CHECK(v(R * 1.01) == 0.0);
  }

  TEST_CASE("negative tabulated potential is flagged at the first bad node") {
    std::vector<double> grid(21), samples(21, 1.0);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = 0.05 * static_cast<double>(i);
    samples[7] = -0.5;
    samples[12] = -2.0;
    samples.back() = 0.0;
    auto prof = RadialProfile::from_samples(grid, samples, TailKind::Zero, 1.0);
    const auto v = make_tabulated(prof);
    const auto rep = validate(v);
    const auto* c = rep.find("nonnegative");
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->pass);
    CHECK(c->node == 7);
    CHECK(c->witness == -0.5);
  }

  TEST_CASE("harmonic trap closed forms") {
    const auto t = make_trap(TrapKind::Harmonic, 1001, 10.0);
    CHECK(t(2.0) == doctest::Approx(4.0));
    CHECK(t.radial_derivative(2.0) == doctest::Approx(4.0));
    CHECK(t.laplacian_value(3.0) == doctest::Approx(6.0));
    // beyond the grid the analytic tail takes over
    CHECK(t(20.0) == doctest::Approx(400.0));
    CHECK(validate(t).all_pass());
  }

  TEST_CASE("trap submultiplicativity constant is small for the harmonic trap") {
    const auto t = make_trap(TrapKind::Harmonic, 1001, 20.0);
    // |x+y|^2 <= 2|x|^2 + 2|y|^2 <= C (|x|^2 + C)(|y|^2 + C) with C = 2 already
    CHECK(submultiplicativity_constant(t) <= 2.0);
  }

  TEST_CASE("quartic trap") {
    const auto t = make_trap("quartic", 1001, 5.0);
    CHECK(t(2.0) == doctest::Approx(16.0));
    CHECK(t.laplacian_value(1.0) == doctest::Approx(20.0));
  }

  TEST_CASE("json round trip") {
    const auto v = make_square_well(2.0, 1.0, 501);
    const auto back = std::get<InteractionPotential>(potential_from_json(to_json(v)));
    CHECK(back.strength == 2.0);
    CHECK(back.support_radius == 1.0);
    CHECK(back.profile.size() == 501);

    const auto t = make_trap(TrapKind::Quartic, 301, 6.0);
    const auto tb = std::get<TrapPotential>(potential_from_json(to_json(t)));
    CHECK(tb.kind == TrapKind::Quartic);
    CHECK(tb.profile.grid().back() == 6.0);
  }

  TEST_CASE("malformed potential json is a config error") {
    nlohmann::json j = {{"kind", "lennard_jones"}, {"parameters", {}}, {"grid", {{"n_pts", 10}}}};
    try {
      potential_from_json(j);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ConfigError);
    }
    CHECK_THROWS_AS(make_trap("sextic", 10, 1.0), Error);
  }

  TEST_CASE("zero potential") {
    const auto v = make_square_well(0.0, 1.0, 101);
    CHECK(v.is_zero());
    CHECK(v.l3_norm == 0.0);
  }
}
