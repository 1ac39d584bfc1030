#include "gpregime/scattering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "gpregime/error.hpp"
#include "gpregime/numerics.hpp"

namespace gpregime::scattering {

using numerics::pi;
using LD = long double;

namespace detail {

// Interior solve of u'' = (V/2 - lambda) u on [0, R] by fixed-step RK4 in
// long double, with the exact free solution beyond R.
struct RadialSolve {
  potentials::InteractionPotential v;
  double R = 0.0;
  std::size_t steps = 0;
  LD h = 0;
  LD lambda = 0;
  LD k = 0;
  LD uR = 0, duR = 0;
  LD I_Vur = 0;  // int_0^R V u r dr
  LD J_ur = 0;   // int_0^R u r dr
  LD scale = 1;  // f = scale * u / r
  double outer = std::numeric_limits<double>::infinity();
  std::vector<LD> u, du;
  numerics::HermiteSpline spline;

  LD u_at(LD r) const {
    if (r <= R) return spline(static_cast<double>(r));
    const LD t = r - R;
    if (k == 0) return uR + duR * t;
    return uR * std::cos(k * t) + duR * std::sin(k * t) / k;
  }
  LD du_at(LD r) const {
    if (r <= R) return spline.derivative(static_cast<double>(r));
    const LD t = r - R;
    if (k == 0) return duR;
    return -uR * k * std::sin(k * t) + duR * std::cos(k * t);
  }
  double f(double r) const {
    if (r >= outer) return 1.0;
    if (r <= 0.0) return static_cast<double>(scale * du.front());
    return static_cast<double>(scale * u_at(r) / r);
  }
  double w(double r) const {
    if (r >= outer) return 0.0;
    if (r <= 0.0) return static_cast<double>(1 - scale * du.front());
    return static_cast<double>(1 - scale * u_at(r) / r);
  }
  double dw(double r) const {
    if (r >= outer || r <= 1e-9) return 0.0;
    const LD rr = r;
    return static_cast<double>(-scale * (du_at(rr) / rr - u_at(rr) / (rr * rr)));
  }
};

}  // namespace detail

namespace {

using detail::RadialSolve;

struct Shot {
  LD uR, duR, I, J;
};

// RK4 on (u, u', int V u r, int u r). Stores node values when `store` is set.
Shot integrate_interior(const potentials::InteractionPotential& v, double R, std::size_t steps,
                        LD lambda, RadialSolve* store) {
  const LD h = static_cast<LD>(R) / steps;
  std::array<LD, 4> y{0, 1, 0, 0};
  auto rhs = [&](LD r, const std::array<LD, 4>& s) {
    const LD vr = v(static_cast<double>(r));
    return std::array<LD, 4>{s[1], (vr / 2 - lambda) * s[0], vr * s[0] * r, s[0] * r};
  };
  if (store) {
    store->u.assign(steps + 1, 0);
    store->du.assign(steps + 1, 0);
    store->u[0] = 0;
    store->du[0] = 1;
  }
  for (std::size_t i = 0; i < steps; ++i) {
    const LD r = h * i;
    const auto k1 = rhs(r, y);
    std::array<LD, 4> tmp;
    for (int c = 0; c < 4; ++c) tmp[c] = y[c] + h / 2 * k1[c];
    const auto k2 = rhs(r + h / 2, tmp);
    for (int c = 0; c < 4; ++c) tmp[c] = y[c] + h / 2 * k2[c];
    const auto k3 = rhs(r + h / 2, tmp);
    for (int c = 0; c < 4; ++c) tmp[c] = y[c] + h * k3[c];
    // Evaluate the last stage just inside the support so a jump at R is not sampled.
    const LD r_end = (i + 1 == steps) ? static_cast<LD>(R) : r + h;
    const auto k4 = rhs(r_end, tmp);
    for (int c = 0; c < 4; ++c) y[c] += h / 6 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    if (store) {
      store->u[i + 1] = y[0];
      store->du[i + 1] = y[1];
    }
  }
  return {y[0], y[1], y[2], y[3]};
}

void finish(RadialSolve& s, const Shot& shot) {
  s.uR = shot.uR;
  s.duR = shot.duR;
  s.I_Vur = shot.I;
  s.J_ur = shot.J;
  s.k = std::sqrt(s.lambda);
  std::vector<double> x(s.steps + 1), y(s.steps + 1), dy(s.steps + 1);
  for (std::size_t i = 0; i <= s.steps; ++i) {
    x[i] = static_cast<double>(s.h * i);
    y[i] = static_cast<double>(s.u[i]);
    dy[i] = static_cast<double>(s.du[i]);
  }
  x.back() = s.R;
  s.spline = numerics::HermiteSpline(std::move(x), std::move(y), std::move(dy));
}

std::size_t interior_steps(std::size_t n_pts) { return 16 * n_pts; }

// r w(r) beyond R as a function of t = r - R, split so that no term is a
// difference of large quantities:
//   c0 + c1 t + A (1 - cos kt) + B (t - sin(kt)/k).
struct Exterior {
  LD c0 = 0, c1 = 0, A = 0, B = 0, k = 0;

  LD E(int n, LD t) const {  // n-th derivative of 1 - cos kt
    if (k == 0) return 0;
    if (n == 0) {
      const LD s = std::sin(k * t / 2);
      return 2 * s * s;
    }
    return -std::pow(k, static_cast<LD>(n)) * std::cos(k * t + n * std::numbers::pi_v<LD> / 2);
  }
  LD H(LD t) const {  // t - sin(kt)/k
    if (k == 0) return 0;
    const LD x = k * t;
    if (std::abs(x) < 0.1L) {
      const LD x2 = x * x;
      return k * k * t * t * t / 6 * (1 - x2 / 20 * (1 - x2 / 42 * (1 - x2 / 72)));
    }
    return t - std::sin(x) / k;
  }
  LD deriv(int n, LD t) const {
    if (n == 0) return c0 + c1 * t + A * E(0, t) + B * H(t);
    if (n == 1) return c1 + A * E(1, t) + B * E(0, t);
    return A * E(n, t) + B * E(n - 1, t);
  }

  // int_0^T h(t) sin(omega (R + t)) dt
  LD integral(LD omega, LD R, LD T) const {
    if (omega > 2 * k) {
      // repeated integration by parts; terms shrink like (k/omega)^2
      const LD p0 = omega * R;
      const LD pT = omega * (R + T);
      const LD c0s = std::cos(p0), s0 = std::sin(p0), cT = std::cos(pT), sT = std::sin(pT);
      LD sum = 0, scale = 1;
      for (int j = 0; j < 200; ++j) {
        const int n = 2 * j;
        const LD at_T = -deriv(n, T) * cT / omega + deriv(n + 1, T) * sT / (omega * omega);
        const LD at_0 = -deriv(n, 0) * c0s / omega + deriv(n + 1, 0) * s0 / (omega * omega);
        const LD term = scale * (at_T - at_0);
        sum += term;
        if (j > 0 && std::abs(term) <= 1e-21L * std::abs(sum)) break;
        scale *= -1 / (omega * omega);
      }
      return sum;
    }
    const auto panels = 8 + static_cast<std::size_t>(std::ceil(static_cast<double>(omega * T)));
    const double w = static_cast<double>(omega), r0 = static_cast<double>(R);
    return numerics::integrate(
        [&](double t) { return static_cast<double>(deriv(0, t)) * std::sin(w * (r0 + t)); }, 0.0,
        static_cast<double>(T), panels);
  }
};

std::vector<double> report_grid(double R, double L, std::size_t n_pts) {
  const std::size_t inner = std::max<std::size_t>(n_pts / 2, 8);
  auto grid = numerics::linspace(0.0, R, inner);
  auto tail = numerics::linspace(R, L, std::max<std::size_t>(n_pts - inner + 1, 8));
  grid.insert(grid.end(), tail.begin() + 1, tail.end());
  return grid;
}

// Sample radii for the sup-type items: every interior node plus a uniform
// exterior grid.
std::vector<double> sup_grid(const RadialSolve& s) {
  std::vector<double> r;
  const std::size_t stride = std::max<std::size_t>(1, s.steps / 4096);
  for (std::size_t i = 1; i <= s.steps; i += stride) r.push_back(static_cast<double>(s.h * i));
  if (std::isfinite(s.outer)) {
    for (double x : numerics::linspace(s.R, s.outer, 4096)) r.push_back(x);
  }
  return r;
}

}  // namespace

double ScatteringSolution::identity_defect() const {
  if (a0 == 0.0) return std::abs(integral_Vf);
  return std::abs(8.0 * pi * a0 - integral_Vf) / (8.0 * pi * a0);
}

ScatteringSolution solve_zero_energy(const potentials::InteractionPotential& v, double r_max,
                                     std::size_t n_pts) {
  const double R = v.support_radius;
  require(R > 0.0, ErrorKind::InvalidParameter, "interaction support radius must be positive");
  require(n_pts >= 512, ErrorKind::InvalidParameter, "zero-energy solve needs n_pts >= 512");
  if (r_max < 10.0 * R) {
    fail(ErrorKind::DomainTooSmall, "r_max must be at least 10 times the support radius");
  }

  RadialSolve s;
  s.v = v;
  s.R = R;
  s.steps = interior_steps(n_pts);
  s.h = static_cast<LD>(R) / s.steps;
  const Shot shot = integrate_interior(v, R, s.steps, 0, &s);
  finish(s, shot);
  require(s.duR > 0, ErrorKind::SolverFailure, "zero-energy solution has non-positive slope at R");
  s.scale = 1 / s.duR;

  // Richardson check against the half-resolution solve.
  const Shot coarse = integrate_interior(v, R, s.steps / 2, 0, nullptr);
  const LD a_fine = R - shot.uR / shot.duR;
  const LD a_coarse = R - coarse.uR / coarse.duR;
  const double rich = static_cast<double>(std::abs(a_fine - a_coarse) / 15);

  ScatteringSolution out;
  out.richardson_error = rich;
  if (rich > 1e-10 * std::max(1.0, static_cast<double>(std::abs(a_fine)))) {
    fail(ErrorKind::SolverFailure, "zero-energy integration did not converge", rich);
  }
  out.a0_matching = static_cast<double>(a_fine);
  out.integral_Vf = static_cast<double>(4 * static_cast<LD>(pi) * s.scale * s.I_Vur);

  out.r_grid = numerics::linspace(0.0, r_max, n_pts);
  out.u.resize(n_pts);
  out.f.resize(n_pts);
  for (std::size_t i = 0; i < n_pts; ++i) {
    const double r = out.r_grid[i];
    out.u[i] = static_cast<double>(s.scale * s.u_at(r));
    out.f[i] = s.f(r);
  }

  // Least-squares 1 - a0/r on the outer 20 percent.
  const double r_lo = 0.8 * r_max;
  out.tail_fit_window = {r_lo, r_max};
  LD num = 0, den = 0;
  for (std::size_t i = 0; i < n_pts; ++i) {
    const double r = out.r_grid[i];
    if (r < r_lo) continue;
    const LD fr = s.scale * s.u_at(r) / r;
    num += (1 - fr) / r;
    den += 1 / (static_cast<LD>(r) * r);
  }
  out.a0 = static_cast<double>(num / den);
  if (v.is_zero()) out.a0 = 0.0;
  return out;
}

NeumannSolution make_neumann(std::shared_ptr<const detail::RadialSolve> data, double ell,
                             double N_param, std::size_t n_pts) {
  NeumannSolution sol;
  sol.data_ = std::move(data);
  sol.ell = ell;
  sol.N_param = N_param;
  sol.radius = sol.data_->outer;
  sol.lambda_ell = static_cast<double>(sol.data_->lambda);
  const auto grid = report_grid(sol.data_->R, sol.radius, std::max<std::size_t>(n_pts, 32));
  auto d = sol.data_;
  sol.f_ell = RadialProfile::sample(
      grid, [d](double r) { return d->f(r); }, TailKind::Analytic, sol.radius);
  sol.w_ell = RadialProfile::sample(
      grid, [d](double r) { return d->w(r); }, TailKind::Zero, sol.radius);
  return sol;
}

NeumannSolution solve_neumann(const potentials::InteractionPotential& v, double ell,
                              double N_param, std::size_t n_pts) {
  require(ell > 0.0 && ell < 1.0, ErrorKind::InvalidParameter, "ell must lie in (0, 1)");
  require(N_param > 0.0, ErrorKind::InvalidParameter, "N must be positive");
  require(n_pts >= 512, ErrorKind::InvalidParameter, "Neumann solve needs n_pts >= 512");
  const double R = v.support_radius;
  const double L = N_param * ell;
  if (L <= R) fail(ErrorKind::InvalidDomain, "N ell must exceed the support radius");

  auto s = std::make_shared<RadialSolve>();
  s->v = v;
  s->R = R;
  s->outer = L;
  s->steps = interior_steps(n_pts);
  s->h = static_cast<LD>(R) / s->steps;

  const LD LL = L;
  auto mismatch = [&](LD lambda) {
    const Shot shot = integrate_interior(v, R, s->steps, lambda, nullptr);
    const LD k = std::sqrt(lambda);
    const LD T = LL - R;
    LD uL, duL;
    if (k == 0) {
      uL = shot.uR + shot.duR * T;
      duL = shot.duR;
    } else {
      uL = shot.uR * std::cos(k * T) + shot.duR * std::sin(k * T) / k;
      duL = -shot.uR * k * std::sin(k * T) + shot.duR * std::cos(k * T);
    }
    return duL - uL / LL;
  };

  LD lambda = 0;
  if (!v.is_zero()) {
    const Shot zero = integrate_interior(v, R, s->steps, 0, nullptr);
    const LD a0 = R - zero.uR / zero.duR;
    require(a0 > 0, ErrorKind::SolverFailure, "scattering length is not positive");
    LD lo = 0;
    LD hi = 3 * a0 / (LL * LL * LL);
    int doubling = 0;
    while (mismatch(hi) > 0) {
      lo = hi;
      hi *= 2;
      if (++doubling > 200) fail(ErrorKind::SolverFailure, "Neumann bracket not found");
    }
    const LD eps = std::numeric_limits<LD>::epsilon();
    for (int it = 0; it < 300 && hi - lo > 4 * eps * hi; ++it) {
      const LD mid = (lo + hi) / 2;
      (mismatch(mid) > 0 ? lo : hi) = mid;
    }
    lambda = (lo + hi) / 2;
  }
  s->lambda = lambda;
  const Shot shot = integrate_interior(v, R, s->steps, lambda, s.get());
  finish(*s, shot);
  const LD uL = s->u_at(LL);
  require(uL > 0, ErrorKind::SolverFailure, "Neumann solution vanishes at the boundary");
  s->scale = LL / uL;

  auto sol = make_neumann(s, ell, N_param, n_pts);
  if (sol.min_u() <= 0.0) {
    fail(ErrorKind::SolverFailure, "Neumann solution has an interior zero (not the ground state)",
         sol.min_u());
  }
  return sol;
}

double NeumannSolution::f(double r) const { return data_->f(r); }
double NeumannSolution::w(double r) const { return data_->w(r); }
double NeumannSolution::dw(double r) const { return data_->dw(r); }
double NeumannSolution::support_radius() const { return data_->R; }
const potentials::InteractionPotential& NeumannSolution::potential() const { return data_->v; }

double NeumannSolution::integral_Vf() const {
  return static_cast<double>(4 * static_cast<LD>(pi) * data_->scale * data_->I_Vur);
}

double NeumannSolution::integral_Vw() const {
  const auto& v = data_->v;
  const double vol =
      4.0 * pi * numerics::integrate([&](double r) { return v(r) * r * r; }, 0.0, data_->R, 64);
  return vol - integral_Vf();
}

double NeumannSolution::integral_w() const {
  const auto& s = *data_;
  const LD R = s.R;
  const LD inner = R * R * R / 3 - s.scale * s.J_ur;
  const double outer = numerics::integrate(
      [&](double r) {
        const LD rr = r;
        return static_cast<double>(rr * rr - s.scale * s.u_at(rr) * rr);
      },
      s.R, s.outer, 256);
  return 4.0 * pi * (static_cast<double>(inner) + outer);
}

double NeumannSolution::w_hat(double p) const {
  if (data_->v.is_zero()) return 0.0;
  if (p == 0.0) return integral_w();
  const auto& s = *data_;
  const double omega = 2.0 * pi * std::abs(p);
  const double R = s.R;
  const auto panels = std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(omega * R)));
  const double inner = numerics::integrate(
      [&](double r) {
        return static_cast<double>((r - s.scale * s.u_at(r)) * std::sin(omega * r));
      },
      0.0, R, panels);

  Exterior ext;
  ext.A = s.scale * s.uR;
  ext.B = s.scale * s.duR;
  ext.c0 = static_cast<LD>(R) - ext.A;
  ext.c1 = 1 - ext.B;
  ext.k = s.k;
  const LD omega_ld = 2 * std::numbers::pi_v<LD> * std::abs(static_cast<LD>(p));
  const double outer = static_cast<double>(ext.integral(omega_ld, R, static_cast<LD>(s.outer) - R));
  return 2.0 / p * (inner + outer);
}

double NeumannSolution::neumann_defect() const {
  const auto& s = *data_;
  const LD L = s.outer;
  return static_cast<double>(s.scale * (s.du_at(L) / L - s.u_at(L) / (L * L)));
}

double NeumannSolution::min_u() const {
  const auto& s = *data_;
  LD m = std::numeric_limits<LD>::max();
  for (std::size_t i = 1; i <= s.steps; ++i) m = std::min(m, s.u[i]);
  for (double r : numerics::linspace(s.R, s.outer, 2048)) m = std::min(m, s.u_at(r));
  return static_cast<double>(m);
}

double RescaledScattering::operator()(double r) const {
  if (r >= chi_radius) return 1.0;
  return source.f(source.N_param * r);
}

RescaledScattering rescale(const NeumannSolution& sol) {
  RescaledScattering out;
  out.source = sol;
  out.chi_radius = sol.ell;
  const double N = sol.N_param;
  std::vector<double> grid = sol.f_ell.grid();
  for (auto& r : grid) r /= N;
  grid.back() = sol.ell;
  auto src = sol;
  out.f_N_ell = RadialProfile::sample(
      grid, [src, N](double r) { return r >= src.ell ? 1.0 : src.f(N * r); },
      TailKind::Analytic, sol.ell);

  // Residual of u'' - (V/2 - lambda) u, with u'' from a sixth-order
  // difference of the stored u' taken at stride m (spacing about R/256) so
  // roundoff stays below truncation. Stencils never straddle R.
  const auto& s = *sol.data();
  static constexpr std::array<LD, 3> c6{3.0L / 4, -3.0L / 20, 1.0L / 60};
  const std::size_t m = std::max<std::size_t>(1, s.steps / 256);
  LD worst = 0;
  std::size_t count = 0;
  for (std::size_t i = 3 * m; i + 3 * m <= s.steps; ++i) {
    LD d2 = 0;
    for (std::size_t j = 1; j <= 3; ++j) d2 += c6[j - 1] * (s.du[i + j * m] - s.du[i - j * m]);
    d2 /= s.h * m;
    const LD r = s.h * i;
    const LD vr = s.v(static_cast<double>(r));
    const LD res = s.scale * std::abs(d2 - (vr / 2 - s.lambda) * s.u[i]) / r;
    worst = std::max(worst, res);
    ++count;
  }
  const std::size_t n_out = 4096;
  const LD he = (static_cast<LD>(s.outer) - s.R) / (n_out - 1);
  std::vector<LD> du(n_out);
  for (std::size_t i = 0; i < n_out; ++i) du[i] = s.du_at(s.R + he * i);
  for (std::size_t i = 3; i + 3 < n_out; ++i) {
    LD d2 = 0;
    for (std::size_t j = 1; j <= 3; ++j) d2 += c6[j - 1] * (du[i + j] - du[i - j]);
    d2 /= he;
    const LD r = s.R + he * i;
    const LD res = s.scale * std::abs(d2 + s.lambda * s.u_at(r)) / r;
    worst = std::max(worst, res);
    ++count;
  }
  out.residual = static_cast<double>(worst) * N * N;
  out.residual_nodes = count;
  return out;
}

std::vector<double> default_p_grid(const NeumannSolution& sol, std::size_t count) {
  return numerics::logspace(0.1 / sol.radius, 10.0 / sol.support_radius(), count);
}

FourierSamples fourier_w(const NeumannSolution& sol, const std::vector<double>& p_grid) {
  require(!p_grid.empty(), ErrorKind::InvalidInput, "empty momentum grid");
  for (double p : p_grid) require(p > 0.0, ErrorKind::InvalidInput, "momenta must be positive");
  FourierSamples out;
  out.p = p_grid;
  out.w_hat.reserve(p_grid.size());
  for (double p : p_grid) {
    const double value = sol.w_hat(p);
    if (!std::isfinite(value)) fail(ErrorKind::SolverFailure, "non-finite w_hat sample");
    out.w_hat.push_back(value);
    out.sup_p2_w_hat = std::max(out.sup_p2_w_hat, p * p * std::abs(value));
  }
  return out;
}

LemmaReport verify_lemma_scattering(const NeumannSolution& sol, const ScatteringSolution& ref) {
  LemmaReport rep;
  rep.id = "lemma_3_0";
  const double a0 = ref.a0;
  const double L = sol.radius;
  const bool zero = a0 == 0.0;

  const double ratio = zero ? 1.0 : sol.lambda_ell * L * L * L / (3.0 * a0);
  rep.add("i_ratio", ratio);
  rep.add("i_deviation", std::abs(ratio - 1.0));

  const double vf = sol.integral_Vf();
  rep.add("ii_scaled_defect", zero ? 0.0 : L * std::abs(vf - 8.0 * pi * a0) / a0);

  double sup_w = 0.0, sup_dw = 0.0;
  double f_min = 1.0, f_max = 0.0;
  for (double r : sup_grid(*sol.data())) {
    const double w = sol.w(r);
    sup_w = std::max(sup_w, w * (r + 1.0));
    sup_dw = std::max(sup_dw, std::abs(sol.dw(r)) * (r * r + 1.0));
    f_min = std::min(f_min, 1.0 - w);
    f_max = std::max(f_max, 1.0 - w);
  }
  f_min = std::min(f_min, sol.f(0.0));
  f_max = std::max(f_max, sol.f(0.0));
  rep.add("iii_sup_w_weighted", sup_w);
  rep.add("iii_sup_dw_weighted", sup_dw);
  const double vol = sol.integral_w() / (L * L);
  const double vol_dev = zero ? 0.0 : std::abs(vol - 0.4 * pi * a0) * L / (a0 * a0);
  rep.add("iii_volume", vol);
  rep.add("iii_volume_deviation_scaled", vol_dev);

  const auto fw = fourier_w(sol, default_p_grid(sol));
  rep.add("iv_sup_p2_w_hat", fw.sup_p2_w_hat);

  rep.add("lambda_ell", sol.lambda_ell);
  rep.add("a0", a0);
  rep.add("N_ell", L);
  rep.add("neumann_defect", sol.neumann_defect());

  const double tol = 1e-12;
  rep.check("f_between_0_and_1", f_min >= -tol && f_max <= 1.0 + tol);
  rep.check("lambda_nonnegative", sol.lambda_ell >= 0.0 && (sol.lambda_ell == 0.0) == zero);
  rep.check("boundary_normalisation", std::abs(sol.f(L - 1e-12 * L) - 1.0) < 1e-9);
  rep.check("neumann_condition", std::abs(sol.neumann_defect()) < 1e-9);
  rep.check("volume_within_5_a0sq_over_NL", vol_dev <= 5.0);
  rep.check("finite", std::isfinite(sup_w) && std::isfinite(sup_dw) &&
                          std::isfinite(fw.sup_p2_w_hat) && std::isfinite(ratio));
  return rep;
}

}  // namespace gpregime::scattering
