#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "gpregime/error.hpp"
#include "gpregime/expm.hpp"
#include "gpregime/fock_generators.hpp"
#include "gpregime/fock_identities.hpp"

using namespace gpregime;
using namespace gpregime::fock;

namespace {

Eigen::MatrixXd random_symmetric(int m, unsigned seed, double frob) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = n(rng);
  a = 0.5 * (a + a.transpose()).eval();
  return frob * a / a.norm();
}

}  // namespace

TEST_SUITE("fock") {
  TEST_CASE("exact surds") {
    const auto r2 = QSurd::sqrt_of(2);
    const auto r3 = QSurd::sqrt_of(3);
    CHECK(r2 * r2 == QSurd(2));
    CHECK((r2 + r3) * (r2 + r3) == QSurd(5) + QSurd(2) * QSurd::sqrt_of(6));
    CHECK(QSurd::sqrt_of(8) == QSurd(2) * r2);
    CHECK(QSurd::sqrt_of(QSurd::Rational(1, 2)) * r2 == QSurd(1));
    CHECK((r2 - r2).is_zero());
    CHECK(r3.to_double() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK_THROWS_AS(QSurd::sqrt_of(-1), Error);
  }

  TEST_CASE("truncated Fock space dimension and indexing") {
    for (auto [m, n] : {std::pair{1, 5}, std::pair{2, 3}, std::pair{3, 4}, std::pair{4, 2}}) {
      const FockSpace s(m, n);
      CHECK(s.dim() == FockSpace::binomial(m + n, n));
      for (std::size_t i = 0; i < s.dim(); ++i) {
        CHECK(s.index(s.state(i)) == i);
        if (i > 0) CHECK(s.total(i) >= s.total(i - 1));
      }
    }
    CHECK(FockSpace::binomial(10, 3) == 120);
    CHECK_FALSE(FockSpace(2, 2).index({3, 0}).has_value());
  }

  TEST_CASE("ladder matrix elements") {
    auto space = std::make_shared<const FockSpace>(2, 4);
    const auto L = build_ladder<Complex>(space, 1);
    const int N = space->n_cap();
    for (std::size_t j = 0; j < space->dim(); ++j) {
      auto occ = space->state(j);
      const int n1 = occ[1], tot = space->total(j);
      if (n1 == 0) continue;
      auto down = occ;
      down[1] -= 1;
      const auto i = *space->index(down);
      CHECK(L.a.matrix.at(i, j).real() == doctest::Approx(std::sqrt(n1)));
      // b = sqrt((N - Ncal)/N) a, with Ncal counted after the annihilation
      CHECK(L.b.matrix.at(i, j).real() ==
            doctest::Approx(std::sqrt(n1 * (N - tot + 1.0) / N)));
    }
    // a* leaves no trace on the top sector
    for (std::size_t j = 0; j < space->dim(); ++j)
      if (space->total(j) == N)
        for (std::size_t i = 0; i < space->dim(); ++i) CHECK(L.a_dag.matrix.at(i, j) == Complex{});
  }

  TEST_CASE("identity suites: float within 1e-12, exact identically zero") {
    for (auto [m, n] : {std::pair{2, 3}, std::pair{3, 3}}) {
      for (auto mode : {NumericMode::Float, NumericMode::Exact}) {
        const auto ccr = verify_ccr(m, n, mode);
        const auto b = verify_b_commutators(m, n, mode);
        const auto un = verify_un(m, n, mode);
        CHECK(ccr.pass(1e-12));
        CHECK(b.pass(1e-12));
        CHECK(un.pass(1e-12));
        if (mode == NumericMode::Exact) {
          CHECK(ccr.worst() == 0.0);
          CHECK(b.worst() == 0.0);
          CHECK(un.worst() == 0.0);
        }
      }
    }
  }

  TEST_CASE("exact mode refuses large spaces") {
    try {
      verify_ccr(5, 6, NumericMode::Exact);  // dim 462
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ResourceLimit);
    }
  }

  TEST_CASE("Gamma(q) is an idempotent projector and U_N is a partial isometry") {
    const FockSpace s(3, 3);
    const auto G = gamma_q<QSurd>(s, 0);
    CHECK((G * G - G).exactly_zero());
    const auto U = build_UN<QSurd>(s, 0);
    const auto UtU = U.adjoint() * U;
    CHECK((UtU - sector_projector<QSurd>(s, 3, 3)).exactly_zero());
    CHECK((U * U.adjoint() - G).exactly_zero());
  }

  TEST_CASE("excitation Hamiltonian energy identity") {
    const auto c = random_coefficients(3, 5);
    validate(c);
    const auto e = energy_identity(c, 4, 20, 9);
    CHECK(e.samples == 20);
    CHECK(e.max_deviation <= 1e-10);
    CHECK(e.vacuum_deviation <= 1e-10);
    const auto adapted = gp_adapt(c, 4);
    CHECK(adapted.residual <= 1e-10);
    CHECK(linear_term_reduction(adapted.coeff, 4) <= 1e-10);
  }

  TEST_CASE("coefficient validation") {
    auto c = random_coefficients(2, 1);
    c.h(0, 1) += Complex(0.5, 0.0);
    CHECK_THROWS_AS(validate(c), Error);
    auto d = random_coefficients(2, 1);
    d.eta(0, 1) += 0.1;
    CHECK_THROWS_AS(validate(d), Error);
  }

  TEST_CASE("expm against Eigen's matrix exponential") {
    std::mt19937 rng(4);
    std::normal_distribution<double> n;
    for (double scale : {0.01, 1.0, 6.0}) {
      Eigen::MatrixXcd a(9, 9);
      for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) a(i, j) = Complex(n(rng), n(rng)) * scale / 3.0;
      numerics::ExpmInfo info;
      const Eigen::MatrixXcd e = numerics::expm(a, &info);
      const Eigen::MatrixXcd ref = a.exp();
      CHECK((e - ref).norm() <= 1e-12 * ref.norm());
      CHECK(info.pade_degree >= 3);
    }
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, 4);
    CHECK(numerics::expm(z) == Eigen::MatrixXd::Identity(4, 4));
  }

  TEST_CASE("growth ratio of a number-conserving unitary is 1") {
    auto space = std::make_shared<const FockSpace>(3, 4);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Random(3, 3);
    h = (h + h.adjoint()).eval();
    const auto X = Complex(0.0, 1.0) * d_gamma(space, h);
    const auto e = exp_generator(X);
    for (int p : {-2, 1, 2}) CHECK(growth_ratio(*space, e.U, p) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("B is anti-Hermitian and zero generators are exact") {
    auto space = std::make_shared<const FockSpace>(3, 4);
    const auto eta = random_symmetric(3, 2, 0.3);
    const auto B = build_B(space, eta);
    CHECK((B + B.adjoint()).max_abs() <= 1e-15);
    const auto table = B_growth(3, {2, 3}, eta / eta.norm(), {0.0, 0.2}, {1, 2});
    for (const auto& e : table.entries)
      if (e.scale == 0.0) CHECK(e.ratio == 1.0);
    const auto d = compute_d_eta(space, Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXcd::Ones(3));
    CHECK(d.max_abs == 0.0);
    CHECK(d.ratio == 0.0);
    Eigen::MatrixXd bad = eta;
    bad(0, 1) += 0.1;
    CHECK_THROWS_AS(build_B(space, bad), Error);
  }

  TEST_CASE("d_eta decays like 1/N_cap") {
    const auto eta = random_symmetric(2, 6, 0.2);
    Eigen::VectorXcd f(2);
    f << Complex(1.0, 0.5), Complex(-0.3, 0.2);
    double prev = 0.0;
    for (int nc : {2, 4, 6}) {
      auto space = std::make_shared<const FockSpace>(2, nc);
      const auto r = compute_d_eta(space, eta, f);
      CHECK(r.ratio * nc < 1.0);
      if (nc > 2) CHECK(r.ratio < prev);
      prev = r.ratio;
    }
  }

  TEST_CASE("second-order BCH defect halves by eight") {
    auto space = std::make_shared<const FockSpace>(2, 4);
    const auto eta = random_symmetric(2, 8, 1.0);
    Eigen::VectorXcd f(2);
    f << Complex(0.7, 0.1), Complex(0.2, -0.4);
    const auto c = bch_second_order(space, eta, f, 0.1);
    CHECK(c.ratio == doctest::Approx(8.0).epsilon(0.1));
  }

  TEST_CASE("conjugation preserves the spectrum") {
    auto space = std::make_shared<const FockSpace>(3, 3);
    const auto c = random_coefficients(3, 2);
    const auto H = build_HN(c, space);
    const auto e = exp_generator(build_B(space, c.eta));
    CHECK(e.unitarity_defect <= 1e-12);
    CHECK(spectrum_shift(H, e.U) <= 1e-10);
  }

  TEST_CASE("cubic generator vanishes for nu = 0") {
    auto space = std::make_shared<const FockSpace>(3, 3);
    const auto c = random_coefficients(3, 2);
    CHECK(build_A(space, Eigen::MatrixXd::Zero(3, 3), c.g).exactly_zero());
    const auto A = build_A(space, c.nu, c.g);
    CHECK((A + A.adjoint()).max_abs() <= 1e-15);
  }
}
