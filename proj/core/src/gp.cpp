#include "gpregime/gp.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>

#include "gpregime/error.hpp"
#include "gpregime/numerics.hpp"

namespace gpregime::gp {

using numerics::pi;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// chi at index i (r = (i + 1) h), odd about r = 0 and zero from r_max on.
double chi_at(const std::vector<double>& chi, long i) {
  if (i == -1) return 0.0;
  if (i < -1) return -chi[static_cast<std::size_t>(-i - 2)];
  if (i >= static_cast<long>(chi.size())) return 0.0;
  return chi[static_cast<std::size_t>(i)];
}

// Fourth-order -d^2/dr^2.
std::vector<double> apply_T(const std::vector<double>& chi, double h) {
  std::vector<double> out(chi.size());
  const double c = 1.0 / (12.0 * h * h);
  for (long i = 0; i < static_cast<long>(chi.size()); ++i) {
    out[static_cast<std::size_t>(i)] =
        c * (chi_at(chi, i - 2) - 16.0 * chi_at(chi, i - 1) + 30.0 * chi_at(chi, i) -
             16.0 * chi_at(chi, i + 1) + chi_at(chi, i + 2));
  }
  return out;
}

// Triplets of the symmetric pentadiagonal T.
std::vector<Eigen::Triplet<double>> T_triplets(std::size_t n, double h, double scale) {
  std::vector<Eigen::Triplet<double>> t;
  const double c = scale / (12.0 * h * h);
  for (std::size_t i = 0; i < n; ++i) {
    const int ii = static_cast<int>(i);
    t.emplace_back(ii, ii, (i == 0 ? 29.0 : 30.0) * c);
    if (i + 1 < n) {
      t.emplace_back(ii, ii + 1, -16.0 * c);
      t.emplace_back(ii + 1, ii, -16.0 * c);
    }
    if (i + 2 < n) {
      t.emplace_back(ii, ii + 2, c);
      t.emplace_back(ii + 2, ii, c);
    }
  }
  return t;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(std::vector<double>& chi, double h) {
  const double n = std::sqrt(4.0 * pi * h * dot(chi, chi));
  require(n > 0.0 && std::isfinite(n), ErrorKind::SolverFailure, "cannot normalise zero state");
  for (auto& x : chi) x /= n;
}

GpState blank(const potentials::TrapPotential& trap, double a0, const GridSpec& grid) {
  require(a0 >= 0.0, ErrorKind::InvalidParameter, "a0 must be non-negative");
  require(grid.h > 0.0 && grid.r_max > 0.0, ErrorKind::InvalidParameter, "invalid GP grid");
  const auto cells = static_cast<std::size_t>(std::llround(grid.r_max / grid.h));
  require(cells >= 16, ErrorKind::InvalidParameter, "GP grid needs at least 16 cells");
  GpState s;
  s.h = grid.h;
  s.r_max = static_cast<double>(cells) * grid.h;
  s.a0 = a0;
  const std::size_t n = cells - 1;
  s.r.resize(n);
  s.v_ext.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.r[i] = static_cast<double>(i + 1) * grid.h;
    s.v_ext[i] = trap(s.r[i]);
  }
  return s;
}

struct Defect {
  double residual;
  double rayleigh;
};

Defect defect(const GpState& s, const std::vector<double>& chi, double eps) {
  const auto t = apply_T(chi, s.h);
  const double g = 8.0 * pi * s.a0;
  double sq = 0.0, ray = 0.0;
  for (std::size_t i = 0; i < chi.size(); ++i) {
    const double phi2 = chi[i] * chi[i] / (s.r[i] * s.r[i]);
    const double hx = t[i] + (s.v_ext[i] + g * phi2) * chi[i];
    ray += chi[i] * hx;
    const double d = hx - eps * chi[i];
    sq += d * d;
  }
  return {std::sqrt(4.0 * pi * s.h * sq), 4.0 * pi * s.h * ray};
}

void finalize(GpState& s) {
  s.energy = energy_of(s, s.chi);
  s.phi.resize(s.chi.size());
  double phi4 = 0.0;
  for (std::size_t i = 0; i < s.chi.size(); ++i) {
    s.phi[i] = s.chi[i] / s.r[i];
    phi4 += s.chi[i] * s.chi[i] * s.chi[i] * s.chi[i] / (s.r[i] * s.r[i]);
  }
  s.phi4 = 4.0 * pi * s.h * phi4;
  s.norm = 4.0 * pi * s.h * dot(s.chi, s.chi);
  s.eps_gp = s.energy.total + 4.0 * pi * s.a0 * s.phi4;
  const auto d = defect(s, s.chi, s.eps_gp);
  s.rayleigh = d.rayleigh;
  s.residual = d.residual;
}

// Fourth-order first derivative of chi.
std::vector<double> chi_prime(const GpState& s) {
  std::vector<double> d(s.chi.size());
  for (long i = 0; i < static_cast<long>(s.chi.size()); ++i)
    d[static_cast<std::size_t>(i)] = (chi_at(s.chi, i - 2) - 8.0 * chi_at(s.chi, i - 1) +
                                      8.0 * chi_at(s.chi, i + 1) - chi_at(s.chi, i + 2)) /
                                     (12.0 * s.h);
  return d;
}

numerics::HermiteSpline chi_spline(const GpState& s) {
  const auto d = chi_prime(s);
  const std::size_t n = s.chi.size();
  std::vector<double> x(n + 2), y(n + 2, 0.0), dy(n + 2, 0.0);
  x[0] = 0.0;
  // chi'(0) = phi(0); the odd extension makes the centred estimate fourth order.
  dy[0] = (8.0 * s.chi[0] - s.chi[1]) / (6.0 * s.h);
  for (std::size_t i = 0; i < n; ++i) {
    x[i + 1] = s.r[i];
    y[i + 1] = s.chi[i];
    dy[i + 1] = d[i];
  }
  x[n + 1] = s.r_max;
  dy[n + 1] = (s.chi[n - 2] - 8.0 * s.chi[n - 1]) / (12.0 * s.h);
  return numerics::HermiteSpline(std::move(x), std::move(y), std::move(dy));
}

}  // namespace

double GpState::phi_at(double rr) const { return PhiInterpolant(*this)(rr); }

PhiInterpolant::PhiInterpolant(const GpState& state)
    : chi_(chi_spline(state)), r_max_(state.r_max), h_(state.h) {}

double PhiInterpolant::operator()(double r) const {
  r = std::abs(r);
  if (r >= r_max_) return 0.0;
  if (r < 1e-3 * h_) return chi_.derivative(0.0);
  return chi_(r) / r;
}

double PhiInterpolant::derivative(double r) const {
  if (r >= r_max_) return 0.0;
  if (r < h_) {
    // phi' is odd; interpolate linearly from 0 to its value at r = h.
    const double at_h = (chi_.derivative(h_) * h_ - chi_(h_)) / (h_ * h_);
    return at_h * r / h_;
  }
  return (chi_.derivative(r) * r - chi_(r)) / (r * r);
}

Energy energy_of(const GpState& s, const std::vector<double>& chi) {
  const auto t = apply_T(chi, s.h);
  double kin = 0.0, trap = 0.0, inter = 0.0;
  for (std::size_t i = 0; i < chi.size(); ++i) {
    const double c2 = chi[i] * chi[i];
    kin += chi[i] * t[i];
    trap += s.v_ext[i] * c2;
    inter += c2 * c2 / (s.r[i] * s.r[i]);
  }
  const double w = 4.0 * pi * s.h;
  Energy e;
  e.kinetic = w * kin;
  e.trap = w * trap;
  e.interaction = 4.0 * pi * s.a0 * w * inter;
  e.total = e.kinetic + e.trap + e.interaction;
  return e;
}

GridSpec default_grid(const potentials::TrapPotential& trap) {
  const double omega = trap.harmonic_frequency();
  const double r_gauss = std::sqrt(2.0 * std::log(1e12) / omega);
  return {std::max(8.0, std::ceil(1.3 * r_gauss)), 0.02};
}

GpState make_state(const potentials::TrapPotential& trap, double a0, const GridSpec& grid,
                   const std::function<double(double)>& phi, bool norm) {
  GpState s = blank(trap, a0, grid);
  s.chi.resize(s.r.size());
  for (std::size_t i = 0; i < s.r.size(); ++i) s.chi[i] = s.r[i] * phi(s.r[i]);
  if (norm) normalize(s.chi, s.h);
  finalize(s);
  return s;
}

GpState minimize_gp(const potentials::TrapPotential& trap, double a0, const GridSpec& grid,
                    const MinimizeOptions& opt) {
  require(opt.tol > 0.0, ErrorKind::InvalidParameter, "tolerance must be positive");
  GpState s = blank(trap, a0, grid);
  const double omega = trap.harmonic_frequency();
  if (std::exp(-omega * s.r_max * s.r_max / 2.0) > 1e-12) {
    fail(ErrorKind::DomainTooSmall, "GP grid does not cover the decay region of the trap");
  }
  const std::size_t n = s.r.size();
  if (opt.initial) {
    require(opt.initial->chi.size() == n && opt.initial->h == s.h, ErrorKind::InvalidInput,
            "warm start must share the grid");
    s.chi = opt.initial->chi;
  } else {
    s.chi.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      s.chi[i] = s.r[i] * std::exp(-omega * s.r[i] * s.r[i] / 2.0);
  }
  normalize(s.chi, s.h);
  finalize(s);
  s.energy_history.push_back(s.energy.total);

  const auto t_base = T_triplets(n, s.h, 1.0);
  const double g = 8.0 * pi * a0;
  double tau = opt.initial_step;
  int accepted = 0;
  for (int it = 0; it < opt.max_iterations && s.residual > opt.tol; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(t_base.size());
    for (const auto& e : t_base) trip.emplace_back(e.row(), e.col(), tau * e.value());
    for (std::size_t i = 0; i < n; ++i) {
      const double phi2 = s.chi[i] * s.chi[i] / (s.r[i] * s.r[i]);
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i),
                        1.0 + tau * (s.v_ext[i] + g * phi2));
    }
    Eigen::SparseMatrix<double> a(static_cast<int>(n), static_cast<int>(n));
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
    if (solver.info() != Eigen::Success) {
      fail(ErrorKind::SolverFailure, "GP step factorisation failed", s.residual);
    }
    const Eigen::Map<const Eigen::VectorXd> rhs(s.chi.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd y = solver.solve(rhs);
    std::vector<double> next(y.data(), y.data() + n);
    normalize(next, s.h);
    const double e_next = energy_of(s, next).total;
    if (e_next > s.energy.total + 1e-13 * std::abs(s.energy.total)) {
      tau /= 2.0;
      if (tau < 1e-10) fail(ErrorKind::SolverFailure, "GP step size collapsed", s.residual);
      continue;
    }
    s.chi = std::move(next);
    finalize(s);
    s.energy_history.push_back(s.energy.total);
    ++accepted;
    tau = std::min(2.0 * tau, 1e6);
  }
  s.iterations = accepted;
  if (s.residual > opt.tol) {
    fail(ErrorKind::SolverFailure, "GP iteration did not reach the tolerance", s.residual);
  }
  return s;
}

double el_residual(const GpState& state) { return defect(state, state.chi, state.eps_gp).residual; }

DecayReport verify_decay(const GpState& s, double nu) {
  require(nu > 0.0, ErrorKind::InvalidParameter, "decay rate must be positive");
  DecayReport rep;
  rep.nu = nu;
  const std::size_t n = s.chi.size();
  std::size_t edge = 0;
  while (edge < n && s.phi[edge] > 10.0 * kEps) ++edge;
  if (edge == 0) {
    rep.failure = "no trusted region";
    return rep;
  }
  rep.trusted_radius = s.r[edge - 1];
  const auto d1 = chi_prime(s);
  const auto t = apply_T(s.chi, s.h);

  std::size_t arg[3] = {0, 0, 0};
  double best[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < edge; ++i) {
    const double r = s.r[i];
    const double weight = std::exp(nu * r);
    const double vals[3] = {std::abs(s.phi[i]), std::abs(d1[i] / r - s.chi[i] / (r * r)),
                            std::abs(t[i] / r)};
    for (int k = 0; k < 3; ++k) {
      if (vals[k] * weight > best[k]) {
        best[k] = vals[k] * weight;
        arg[k] = i;
      }
    }
  }
  rep.c_phi = best[0];
  rep.c_dphi = best[1];
  rep.c_laplacian = best[2];
  const bool finite = std::isfinite(best[0]) && std::isfinite(best[1]) && std::isfinite(best[2]);
  // A supremum sitting in the last 5 percent of the trusted region grows with
  // the domain: no decay at this rate.
  const std::size_t margin = std::max<std::size_t>(2, edge / 20);
  bool pinned = false;
  const char* names[3] = {"phi", "phi'", "Laplacian phi"};
  for (int k = 0; k < 3; ++k) {
    if (arg[k] + margin >= edge) {
      pinned = true;
      if (rep.failure.empty()) rep.failure = std::string("supremum of ") + names[k] +
                                             " e^{nu r} at the edge of the trusted region";
    }
  }
  rep.pass = finite && !pinned;
  return rep;
}

double phi_hat(const GpState& s, double p) {
  const auto sp = chi_spline(s);
  const std::size_t cells = s.chi.size() + 1;
  if (p == 0.0) {
    return 4.0 * pi * numerics::integrate([&](double r) { return sp(r) * r; }, 0.0, s.r_max, cells);
  }
  const double omega = 2.0 * pi * std::abs(p);
  const auto sub = static_cast<std::size_t>(std::ceil(omega * s.h / (0.5 * pi)));
  const double integral = numerics::integrate(
      [&](double r) { return sp(r) * std::sin(omega * r); }, 0.0, s.r_max,
      cells * std::max<std::size_t>(1, sub));
  return 2.0 / p * integral;
}

FourierDecayReport fourier_decay(const GpState& s, const std::vector<double>& p_grid) {
  require(p_grid.size() >= 3, ErrorKind::InvalidInput, "momentum grid needs at least 3 nodes");
  const double span = p_grid.back() / p_grid.front();
  require(p_grid.front() > 0.0 && span >= 100.0, ErrorKind::InvalidInput,
          "momentum grid must be positive and span two decades");
  FourierDecayReport rep;
  rep.p = p_grid;
  rep.phi_hat0 = phi_hat(s, 0.0);
  for (double p : p_grid) {
    const double v = phi_hat(s, p);
    rep.phi_hat.push_back(v);
    rep.sup_weighted = std::max(rep.sup_weighted, std::abs(v) * std::pow(1.0 + p, 4));
  }
  // Resolved range: well above the quadrature noise floor.
  const double floor = 1e-10 * std::abs(rep.phi_hat0);
  std::size_t last = 0;
  while (last < p_grid.size() && std::abs(rep.phi_hat[last]) > floor) ++last;
  std::vector<double> x, y;
  const double p_split = 5.0;
  for (std::size_t i = 0; i < last; ++i) {
    if (p_grid[i] >= p_split) {
      x.push_back(p_grid[i]);
      y.push_back(rep.phi_hat[i]);
    }
  }
  if (x.size() < 3 && last >= 3) {
    // Nothing resolved past p = 5: fit the outer half (in log p) of the resolved range.
    x.clear();
    y.clear();
    const double p_hi = p_grid[last - 1];
    for (std::size_t i = 0; i < last; ++i) {
      if (p_grid[i] >= std::sqrt(p_hi * p_grid.front())) {
        x.push_back(p_grid[i]);
        y.push_back(rep.phi_hat[i]);
      }
    }
  }
  if (x.size() >= 3) {
    rep.tail_slope = fit_slope(x, y, -4.0, std::numeric_limits<double>::infinity());
    rep.tail_slope.pass = rep.tail_slope.slope <= -4.0;
    rep.fit_p_lo = x.front();
    rep.fit_p_hi = x.back();
  }
  return rep;
}

VextBound vext_phi_bound(const GpState& s, const potentials::TrapPotential& trap) {
  VextBound b;
  std::size_t arg = 0;
  double sq = 0.0;
  for (std::size_t i = 0; i < s.chi.size(); ++i) {
    const double v = trap(s.r[i]);
    const double val = v * std::abs(s.phi[i]);
    if (val > b.sup_vext_phi) {
      b.sup_vext_phi = val;
      arg = i;
    }
    sq += v * v * s.chi[i] * s.chi[i];
  }
  // Parabolic refinement of the discrete maximum.
  if (arg > 0 && arg + 1 < s.chi.size()) {
    auto val = [&](std::size_t i) { return trap(s.r[i]) * std::abs(s.phi[i]); };
    const double y0 = val(arg - 1), y1 = val(arg), y2 = val(arg + 1);
    const double denom = y0 - 2.0 * y1 + y2;
    if (denom < 0.0) b.sup_vext_phi = y1 - (y2 - y0) * (y2 - y0) / (8.0 * denom);
  }
  b.vext2_phi2 = 4.0 * pi * s.h * sq;
  return b;
}

SpectrumResult hgp_spectrum(const GpState& s, const potentials::TrapPotential& trap,
                            std::size_t k) {
  require(k >= 2, ErrorKind::InvalidParameter, "need at least two eigenpairs");
  const std::size_t n = s.chi.size();
  require(k <= n, ErrorKind::InvalidParameter, "more eigenpairs requested than grid nodes");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (const auto& e : T_triplets(n, s.h, 1.0)) m(e.row(), e.col()) += e.value();
  const double g = 8.0 * pi * s.a0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    m(ii, ii) += trap(s.r[i]) + g * s.phi[i] * s.phi[i] - s.eps_gp;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) fail(ErrorKind::SolverFailure, "h_GP eigensolver failed");
  SpectrumResult out;
  const double w = std::sqrt(4.0 * pi * s.h);
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.eigenvalues.push_back(es.eigenvalues()(jj));
    const Eigen::VectorXd v = es.eigenvectors().col(jj);
    double ov = 0.0;
    for (std::size_t i = 0; i < n; ++i) ov += s.chi[i] * v(static_cast<Eigen::Index>(i));
    out.overlaps.push_back(std::abs(ov * w));
    std::vector<double> vec(n);
    for (std::size_t i = 0; i < n; ++i) vec[i] = v(static_cast<Eigen::Index>(i)) / w;
    out.vectors.push_back(std::move(vec));
  }
  out.gap = out.eigenvalues[1];
  return out;
}

LemmaReport verify_gap(const GpState& s, const potentials::TrapPotential& trap) {
  LemmaReport rep;
  rep.id = "section3_gap";
  const auto sp = hgp_spectrum(s, trap, 4);
  rep.add("lambda0", sp.eigenvalues[0]);
  rep.add("lambda1", sp.gap);
  rep.add("lambda2", sp.eigenvalues[2]);
  rep.add("overlap0", sp.overlaps[0]);
  rep.add("eps_gp", s.eps_gp);
  rep.check("lambda0_within_1e-6_lambda1", std::abs(sp.eigenvalues[0]) <= 1e-6 * sp.gap);
  rep.check("overlap_at_least_1-1e-8", sp.overlaps[0] >= 1.0 - 1e-8);
  rep.check("gap_positive", sp.gap > 0.0);
  return rep;
}

LemmaReport verify_appendix_decay(const GpState& s, const potentials::TrapPotential& trap,
                                  const GpState& refined) {
  LemmaReport rep;
  rep.id = "appendix_a_decay";
  bool all_pass = true;
  bool monotone = true;
  double prev[3] = {0.0, 0.0, 0.0};
  for (double nu : {1.0, 2.0, 4.0}) {
    const auto d = verify_decay(s, nu);
    const std::string tag = "nu" + std::to_string(static_cast<int>(nu));
    rep.add("C_phi_" + tag, d.c_phi);
    rep.add("C_dphi_" + tag, d.c_dphi);
    rep.add("C_lap_" + tag, d.c_laplacian);
    all_pass = all_pass && d.pass;
    monotone = monotone && d.c_phi >= prev[0] && d.c_dphi >= prev[1] && d.c_laplacian >= prev[2];
    prev[0] = d.c_phi;
    prev[1] = d.c_dphi;
    prev[2] = d.c_laplacian;
  }
  const auto grid = numerics::logspace(0.05, 20.0, 48);
  const auto fd = fourier_decay(s, grid);
  const auto fr = fourier_decay(refined, grid);
  const double stability = std::abs(fd.sup_weighted - fr.sup_weighted) / fr.sup_weighted;
  rep.add("sup_phi_hat_weighted", fd.sup_weighted);
  rep.add("sup_phi_hat_weighted_refined", fr.sup_weighted);
  rep.add("phi_hat_refinement_change", stability);
  rep.add("phi_hat_tail_slope", fd.tail_slope.slope);
  rep.add("phi_hat_fit_p_lo", fd.fit_p_lo);
  rep.add("phi_hat_fit_p_hi", fd.fit_p_hi);
  const auto vb = vext_phi_bound(s, trap);
  rep.add("sup_vext_phi", vb.sup_vext_phi);
  rep.add("vext2_phi2", vb.vext2_phi2);
  rep.check("decay_constants_finite", all_pass);
  rep.check("decay_constants_monotone_in_nu", monotone);
  rep.check("phi_hat_refinement_stable_10pct", stability <= 0.10);
  rep.check("phi_hat_tail_slope_at_most_-4", fd.tail_slope.pass);
  rep.check("vext_bounds_finite", std::isfinite(vb.sup_vext_phi) && std::isfinite(vb.vext2_phi2));
  return rep;
}

}  // namespace gpregime::gp
