#include "gpregime/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <mutex>
#include <optional>
#include <thread>

#include "gpregime/error.hpp"
#include "gpregime/fock_generators.hpp"
#include "gpregime/fock_identities.hpp"
#include "gpregime/gp.hpp"
#include "gpregime/kernels.hpp"
#include "gpregime/numerics.hpp"
#include "gpregime/potentials.hpp"
#include "gpregime/scattering.hpp"
#include "gpregime/slope.hpp"

namespace gpregime::pipeline {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
using numerics::pi;

const std::vector<std::string> kStages = {"scatter", "gp", "kernels", "fock"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string at(const std::string& name, const std::string& key, double v) {
  return name + "@" + key + "=" + fmt(v);
}

// Potential objects are kept with sorted keys so a parse/serialise round trip
// is the identity whatever order the input used.
ojson canonical(const json& j) { return ojson::parse(j.dump()); }

// Reads keys out of one JSON object and rejects leftovers.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorKind::ConfigError, where_ + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorKind::ConfigError, where_ + "." + key + ": " + e.what());
    }
  }

  void raw(const char* key, ojson& out) {
    seen_.insert(key);
    if (j_.contains(key)) out = canonical(j_.at(key));
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& sub(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail(ErrorKind::ConfigError, "unknown key '" + k + "' in " + where_);
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

// Every threshold by name, so parse and serialise share one list.
template <class F>
void each_threshold(Thresholds& t, F&& f) {
  f("a0_rel", t.a0_rel);
  f("identity_rel", t.identity_rel);
  f("lemma30_i_slope", t.lemma30_i_slope);
  f("lemma30_i_slope_tol", t.lemma30_i_slope_tol);
  f("lemma30_ii_spread", t.lemma30_ii_spread);
  f("lemma30_iii_volume", t.lemma30_iii_volume);
  f("refinement_rel", t.refinement_rel);
  f("gp_energy_abs", t.gp_energy_abs);
  f("gp_l2_abs", t.gp_l2_abs);
  f("gp_eps_abs", t.gp_eps_abs);
  f("gap_lambda0_rel", t.gap_lambda0_rel);
  f("gap_overlap", t.gap_overlap);
  f("oscillator_gap_abs", t.oscillator_gap_abs);
  f("lowpass_l1_abs", t.lowpass_l1_abs);
  f("lowpass_slope_tol", t.lowpass_slope_tol);
  f("norm_slope_tol", t.norm_slope_tol);
  f("hyperbolic_slope_margin", t.hyperbolic_slope_margin);
  f("cross_slope_margin", t.cross_slope_margin);
  f("grad_stability", t.grad_stability);
  f("cross_refinement", t.cross_refinement);
  f("factorization_rel", t.factorization_rel);
  f("pointwise_constant", t.pointwise_constant);
  f("fock_float", t.fock_float);
  f("energy_identity", t.energy_identity);
  f("spectrum_invariance", t.spectrum_invariance);
  f("unitarity", t.unitarity);
  f("growth_constant", t.growth_constant);
  f("d_eta_constant", t.d_eta_constant);
  f("bch_ratio_lo", t.bch_ratio_lo);
  f("bch_ratio_hi", t.bch_ratio_hi);
}

ojson default_interaction() {
  return canonical(json{{"kind", "square_well"}, {"parameters", {{"V0", 2.0}, {"R", 1.0}}}, {"grid", {{"n_pts", 2001}}}});
}

ojson default_trap() {
  return canonical(json{{"kind", "harmonic"}, {"grid", {{"n_pts", 2048}, {"r_max", 12.0}}}});
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }
double min_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }
bool all_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// max/min - 1 over a positive series; zero series are trivially stable
double spread(const std::vector<double>& v) {
  if (all_zero(v)) return 0.0;
  const double lo = min_of(v);
  return lo > 0.0 ? max_of(v) / lo - 1.0 : std::numeric_limits<double>::infinity();
}

void add_fit(LemmaReport& r, const std::string& name, const SlopeFit& f) {
  r.add(name + "_slope", f.slope);
  if (f.trivial) r.add(name + "_trivial", 1.0);
}

// ----------------------------------------------------------------- scatter

struct ScatterOut {
  potentials::InteractionPotential v;
  scattering::ScatteringSolution ref;
  double a0 = 0.0;
};

double closed_form_a0(const ojson& interaction) {
  if (interaction.value("kind", "") != "square_well") return std::numeric_limits<double>::quiet_NaN();
  const double v0 = interaction.at("parameters").at("V0").get<double>();
  const double R = interaction.at("parameters").at("R").get<double>();
  if (v0 == 0.0) return 0.0;
  const double kappa = std::sqrt(v0 / 2.0);
  return R - std::tanh(kappa * R) / kappa;
}

ScatterOut run_scatter(const RunConfig& cfg, Bundle& out) {
  const auto& P = cfg.scatter;
  const auto& T = cfg.thresholds;
  auto any = potentials::potential_from_json(json::parse(P.interaction.dump()));
  if (!std::holds_alternative<potentials::InteractionPotential>(any))
    fail(ErrorKind::ConfigError, "scatter.interaction must describe an interaction potential");
  ScatterOut s{std::get<potentials::InteractionPotential>(any), {}, 0.0};
  s.ref = scattering::solve_zero_energy(s.v, P.r_max, P.n_pts);
  s.a0 = s.ref.a0;
  const bool zero = s.v.is_zero();

  LemmaReport len;
  len.id = "scattering_length";
  len.add("a0", s.a0);
  len.add("a0_matching", s.ref.a0_matching);
  len.add("integral_Vf", s.ref.integral_Vf);
  len.add("identity_defect", s.ref.identity_defect());
  const double exact = closed_form_a0(P.interaction);
  if (std::isfinite(exact)) {
    const double rel = exact == 0.0 ? std::abs(s.a0) : std::abs(s.a0 - exact) / exact;
    len.add("a0_closed_form", exact);
    len.add("a0_rel_error", rel);
    len.check("a0_matches_closed_form", rel <= T.a0_rel);
  }
  len.check("a0_identity", s.ref.identity_defect() <= T.identity_rel);
  out.entries.push_back(len);

  const std::size_t n = P.n_ell.size();
  std::vector<LemmaReport> reps(n);
  parallel_for(n, [&](std::size_t i) {
    const auto sol = scattering::solve_neumann(s.v, P.ell, P.n_ell[i] / P.ell, P.neumann_pts);
    reps[i] = scattering::verify_lemma_scattering(sol, s.ref);
  });

  std::vector<double> dev, scaled, vol;
  bool f_ok = true, finite = true, normal = true;
  for (const auto& r : reps) {
    dev.push_back(r.value("i_deviation"));
    scaled.push_back(r.value("ii_scaled_defect"));
    vol.push_back(r.value("iii_volume_deviation_scaled"));
    for (const auto& [name, ok] : r.checks) {
      if (name == "f_between_0_and_1") f_ok = f_ok && ok;
      if (name == "finite") finite = finite && ok;
      if (name == "boundary_normalisation" || name == "neumann_condition") normal = normal && ok;
    }
  }

  LemmaReport i;
  i.id = "lemma_3_0_i";
  for (std::size_t k = 0; k < n; ++k) {
    i.add(at("lambda_ell", "N_ell", P.n_ell[k]), reps[k].value("lambda_ell"));
    i.add(at("deviation", "N_ell", P.n_ell[k]), dev[k]);
  }
  const auto fit = fit_slope(P.n_ell, dev, T.lemma30_i_slope, T.lemma30_i_slope_tol);
  add_fit(i, "deviation", fit);
  i.check("deviation_slope", fit.pass);
  i.check("neumann_solutions_valid", normal);
  out.entries.push_back(i);

  LemmaReport ii;
  ii.id = "lemma_3_0_ii";
  for (std::size_t k = 0; k < n; ++k) ii.add(at("scaled_defect", "N_ell", P.n_ell[k]), scaled[k]);
  ii.add("scaled_defect_spread", zero ? 1.0 : max_of(scaled) / min_of(scaled));
  ii.check("scaled_defect_uniform", zero || (min_of(scaled) > 0.0 && max_of(scaled) / min_of(scaled) < T.lemma30_ii_spread));
  ii.check("f_and_w_in_unit_interval", f_ok);
  out.entries.push_back(ii);

  LemmaReport iii;
  iii.id = "lemma_3_0_iii";
  double sup_w = 0.0, sup_dw = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    iii.add(at("volume_deviation_scaled", "N_ell", P.n_ell[k]), vol[k]);
    sup_w = std::max(sup_w, reps[k].value("iii_sup_w_weighted"));
    sup_dw = std::max(sup_dw, reps[k].value("iii_sup_dw_weighted"));
  }
  iii.add("sup_w_weighted", sup_w);
  iii.add("sup_dw_weighted", sup_dw);
  iii.check("volume_within_bound", max_of(vol) <= T.lemma30_iii_volume);
  iii.check("weighted_sups_finite", finite);
  out.entries.push_back(iii);

  LemmaReport iv;
  iv.id = "lemma_3_0_iv";
  const double N0 = P.reference_n_ell / P.ell;
  const auto coarse = scattering::solve_neumann(s.v, P.ell, N0, P.neumann_pts);
  const auto fine = scattering::solve_neumann(s.v, P.ell, N0, 2 * P.neumann_pts);
  // refine both the solve and the momentum sampling
  const double a = scattering::fourier_w(coarse, scattering::default_p_grid(coarse)).sup_p2_w_hat;
  const double b = scattering::fourier_w(fine, scattering::default_p_grid(fine, 128)).sup_p2_w_hat;
  const double change = b == 0.0 ? std::abs(a) : std::abs(a - b) / b;
  iv.add("sup_p2_w_hat", a);
  iv.add("sup_p2_w_hat_refined", b);
  iv.add("refinement_change", change);
  iv.check("sup_finite", std::isfinite(a) && std::isfinite(b));
  iv.check("refinement_stable", change <= T.refinement_rel);
  out.entries.push_back(iv);
  return s;
}

// ---------------------------------------------------------------------- gp

struct GpOut {
  potentials::TrapPotential trap;
  gp::GpState state;
};

double gaussian_l2_error(const gp::GpState& s) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.r.size(); ++i) {
    const double g = std::pow(pi, -0.75) * std::exp(-0.5 * s.r[i] * s.r[i]);
    const double d = s.phi[i] - g;
    e += 4.0 * pi * s.h * s.r[i] * s.r[i] * d * d;
  }
  return std::sqrt(e);
}

GpOut run_gp(const RunConfig& cfg, const ScatterOut& sc, Bundle& out) {
  const auto& P = cfg.gp;
  const auto& T = cfg.thresholds;
  auto any = potentials::potential_from_json(json::parse(P.trap.dump()));
  if (!std::holds_alternative<potentials::TrapPotential>(any))
    fail(ErrorKind::ConfigError, "gp.trap must describe a trap");
  GpOut g{std::get<potentials::TrapPotential>(any), {}};
  auto grid = gp::default_grid(g.trap);
  grid.h = P.spacing;
  gp::MinimizeOptions opt;
  opt.tol = P.tol;
  const bool harmonic = g.trap.kind == potentials::TrapKind::Harmonic;

  LemmaReport m;
  m.id = "gp_minimizer";
  double oscillator_gap = std::numeric_limits<double>::quiet_NaN();
  if (harmonic) {
    const auto s0 = gp::minimize_gp(g.trap, 0.0, grid, opt);
    const double l2 = gaussian_l2_error(s0);
    m.add("oracle_energy", s0.energy.total);
    m.add("oracle_energy_error", std::abs(s0.energy.total - 3.0));
    m.add("oracle_l2_error", l2);
    m.check("oracle_energy", std::abs(s0.energy.total - 3.0) <= T.gp_energy_abs);
    m.check("oracle_profile", l2 <= T.gp_l2_abs);
    oscillator_gap = gp::hgp_spectrum(s0, g.trap, 4).gap;
  }
  g.state = gp::minimize_gp(g.trap, sc.a0, grid, opt);
  const auto& s = g.state;
  const double eps_defect = std::abs(s.eps_gp - (s.energy.total + 4.0 * pi * s.a0 * s.phi4));
  m.add("a0", s.a0);
  m.add("energy", s.energy.total);
  m.add("eps_gp", s.eps_gp);
  m.add("rayleigh", s.rayleigh);
  m.add("residual", s.residual);
  m.add("eps_identity_defect", eps_defect);
  m.add("iterations", s.iterations);
  m.check("residual_within_tol", s.residual <= P.tol);
  m.check("eps_identity", eps_defect <= T.gp_eps_abs);
  out.entries.push_back(m);

  auto gap = gp::verify_gap(s, g.trap);
  if (harmonic) {
    gap.add("oscillator_gap", oscillator_gap);
    gap.check("oscillator_gap_is_4", std::abs(oscillator_gap - 4.0) <= T.oscillator_gap_abs);
  }
  out.entries.push_back(gap);

  const auto refined = gp::minimize_gp(g.trap, sc.a0, gp::GridSpec{grid.r_max, 0.5 * grid.h}, opt);
  out.entries.push_back(gp::verify_appendix_decay(s, g.trap, refined));
  return g;
}

// ----------------------------------------------------------------- kernels

struct EllPoint {
  kernels::NormReport eta;
  kernels::NuNormReport nu;
  kernels::PhaseSpaceNorms ps;
};

void run_kernels(const RunConfig& cfg, const ScatterOut& sc, const GpOut& g, Bundle& out) {
  const auto& P = cfg.kernels;
  const auto& T = cfg.thresholds;
  const std::size_t npts = cfg.scatter.neumann_pts;
  const double half_alpha = 0.5 * P.alpha;

  LemmaReport low;
  low.id = "gaussian_lowpass";
  std::vector<double> l2;
  double worst_l1 = 0.0, worst_cf = 0.0;
  for (double ell : P.ell) {
    const auto gl = kernels::build_gaussian_lowpass(ell, P.beta);
    low.add(at("l1_norm", "ell", ell), gl.l1_norm);
    low.add(at("l2_norm", "ell", ell), gl.l2_norm);
    worst_l1 = std::max(worst_l1, std::abs(gl.l1_norm - 1.0));
    worst_cf = std::max(worst_cf, std::abs(gl.l2_norm - gl.l2_closed_form) / gl.l2_closed_form);
    l2.push_back(gl.l2_norm);
  }
  const auto lfit = fit_slope(P.ell, l2, -1.5 * P.beta, T.lowpass_slope_tol);
  add_fit(low, "l2_norm", lfit);
  low.add("l2_closed_form_rel", worst_cf);
  low.check("l1_norm_is_1", worst_l1 <= T.lowpass_l1_abs);
  low.check("l2_slope", lfit.pass);
  low.check("l2_matches_closed_form", worst_cf <= 1e-8);
  out.entries.push_back(low);

  // ell sweep at fixed large N
  std::vector<EllPoint> pts(P.ell.size());
  parallel_for(P.ell.size(), [&](std::size_t i) {
    const double ell = P.ell[i];
    const auto sol = scattering::solve_neumann(sc.v, ell, P.slope_N, npts);
    const auto G = kernels::build_G(sol);
    const auto cut = kernels::make_cutoff(ell, P.alpha, P.beta);
    const auto eta = kernels::build_eta_H(G, g.state, cut);
    const auto nu = kernels::build_nu_H(G, g.state, cut);
    pts[i].eta = kernels::eta_norms(eta);
    pts[i].nu = kernels::nu_norms(nu);
    pts[i].ps = kernels::phase_space_norms(eta);
  });
  auto series = [&](auto get) {
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(get(p));
    return v;
  };

  // N sweep
  const double ells = P.n_sweep_ell;
  const std::size_t nn = P.n_sweep.size();
  std::vector<kernels::NormReport> nrep(nn), nrep_ref(nn);
  std::vector<kernels::HnReport> hrep(nn);
  parallel_for(nn, [&](std::size_t i) {
    const double N = P.n_sweep[i];
    const auto sol = scattering::solve_neumann(sc.v, ells, N, npts);
    nrep[i] = kernels::eta_norms(
        kernels::build_eta_H(kernels::build_G(sol), g.state, kernels::make_cutoff(ells, P.alpha, P.beta)));
    hrep[i] = kernels::build_hN(sol, g.state, sc.a0);
    // same N at the reference ell, reported only
    const auto sr = scattering::solve_neumann(sc.v, P.reference_ell, N, npts);
    nrep_ref[i] = kernels::eta_norms(kernels::build_eta_H(kernels::build_G(sr), g.state,
                                                          kernels::make_cutoff(P.reference_ell, P.alpha, P.beta)));
  });

  // reference kernel for lattice and pointwise work
  const double ell0 = P.reference_ell;
  const double Nref = P.reference_n_ell / ell0;
  const auto sol0 = scattering::solve_neumann(sc.v, ell0, Nref, npts);
  const auto G0 = kernels::build_G(sol0);
  const auto eta0 = kernels::build_eta_H(G0, g.state, kernels::make_cutoff(ell0, P.alpha, P.beta));

  // eta_H: norm, gradient and power bounds
  LemmaReport l22;
  l22.id = "lemma_2_2";
  const auto eta_norm = series([](const EllPoint& p) { return p.eta.eta_norm; });
  for (std::size_t i = 0; i < P.ell.size(); ++i) {
    l22.add(at("eta_norm", "ell", P.ell[i]), eta_norm[i]);
    l22.add(at("sup_eta_x_ratio", "ell", P.ell[i]), pts[i].eta.sup_eta_x_ratio);
    l22.add(at("pointwise_ratio", "ell", P.ell[i]), pts[i].eta.pointwise_ratio);
  }
  const auto efit = fit_slope(P.ell, eta_norm, half_alpha, T.norm_slope_tol);
  add_fit(l22, "eta_norm", efit);
  std::vector<double> grad, grad_ref;
  for (std::size_t i = 0; i < nn; ++i) {
    grad.push_back(nrep[i].grad1_norm / std::sqrt(P.n_sweep[i]));
    grad_ref.push_back(nrep_ref[i].grad1_norm / std::sqrt(P.n_sweep[i]));
    l22.add(at("grad1_over_sqrtN", "N", P.n_sweep[i]), grad.back());
    l22.add(at("grad1_over_sqrtN_reference_ell", "N", P.n_sweep[i]), grad_ref.back());
  }
  l22.add("grad1_sweep_ell", ells);
  l22.add("grad1_spread", spread(grad));
  l22.add("grad1_spread_reference_ell", spread(grad_ref));
  const auto pb2 = kernels::eta_power_bound(eta0, 2, P.samples, cfg.seed, P.lattice_side);
  const auto pb3 = kernels::eta_power_bound(eta0, 3, P.samples, cfg.seed + 1, P.lattice_side);
  l22.add("power_bound_ratio_n2", pb2.max_ratio);
  l22.add("power_bound_ratio_n3", pb3.max_ratio);
  double fact = 0.0;
  {
    std::mt19937 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0), lr(std::log(0.02), std::log(1.0));
    for (int k = 0; k < 5; ++k) {
      std::array<double, 3> d{u(rng), u(rng), u(rng)};
      const double n = std::hypot(d[0], d[1], d[2]);
      const double r = std::exp(lr(rng));
      for (auto& c : d) c *= r / n;
      const double direct = kernels::g_direct_3d(eta0, d);
      const double fac = eta0.g(r);
      if (direct != 0.0) fact = std::max(fact, std::abs(fac - direct) / std::abs(direct));
      else fact = std::max(fact, std::abs(fac));
    }
  }
  l22.add("factorization_rel", fact);
  l22.check("eta_norm_slope", efit.pass);
  l22.check("grad1_over_sqrtN_stable", spread(grad) <= T.grad_stability);
  l22.check("power_bound_n2", pb2.pass);
  l22.check("power_bound_n3", pb3.pass);
  l22.check("factorization_matches_direct", fact <= T.factorization_rel);
  out.entries.push_back(l22);

  // nu_H
  LemmaReport l24;
  l24.id = "lemma_2_4";
  const auto nu_norm = series([](const EllPoint& p) { return p.nu.nu_norm; });
  for (std::size_t i = 0; i < P.ell.size(); ++i) {
    l24.add(at("nu_norm", "ell", P.ell[i]), nu_norm[i]);
    l24.add(at("sup_nu_x", "ell", P.ell[i]), pts[i].nu.sup_nu_x);
    l24.add(at("sup_nu_y_ratio", "ell", P.ell[i]), pts[i].nu.sup_nu_y_ratio);
    l24.add(at("sup_p2_nu_slice", "ell", P.ell[i]), pts[i].nu.sup_p2_nu_slice);
  }
  const auto nfit = fit_slope(P.ell, nu_norm, half_alpha, T.norm_slope_tol);
  add_fit(l24, "nu_norm", nfit);
  l24.check("nu_norm_slope", nfit.pass);
  l24.check("momentum_slices_finite", std::all_of(pts.begin(), pts.end(), [](const EllPoint& p) {
              return std::isfinite(p.nu.sup_p2_nu_slice) && std::isfinite(p.nu.sup_nu_x);
            }));
  out.entries.push_back(l24);

  // hyperbolic remainders
  LemmaReport pr;
  pr.id = "bndpr";
  const auto pn = series([](const EllPoint& p) { return p.ps.p_norm; });
  const auto rn = series([](const EllPoint& p) { return p.ps.r_norm; });
  for (std::size_t i = 0; i < P.ell.size(); ++i) {
    pr.add(at("p_norm", "ell", P.ell[i]), pn[i]);
    pr.add(at("r_norm", "ell", P.ell[i]), rn[i]);
  }
  const auto pfit = fit_slope_at_least(P.ell, pn, P.alpha - T.hyperbolic_slope_margin);
  const auto rfit = fit_slope_at_least(P.ell, rn, P.alpha - T.hyperbolic_slope_margin);
  add_fit(pr, "p_norm", pfit);
  add_fit(pr, "r_norm", rfit);
  const auto hk = kernels::hyperbolic(eta0, P.series_tol, P.lattice_side, P.samples, cfg.seed);
  pr.add("lattice_series_depth", hk.series_depth);
  pr.add("lattice_tail_bound", hk.tail_bound);
  pr.add("lattice_op_norm", hk.op_norm);
  pr.add("lattice_hs_norm_p", hk.hs_norm_p);
  pr.add("lattice_hs_norm_r", hk.hs_norm_r);
  pr.add("pointwise_p_constant", hk.sup_pointwise_p);
  pr.add("pointwise_r_constant", hk.sup_pointwise_r);
  pr.check("p_norm_slope", pfit.pass);
  pr.check("r_norm_slope", rfit.pass);
  pr.check("series_tail_within_tol", hk.tail_bound <= P.series_tol);
  pr.check("pointwise_bounds", hk.sup_pointwise_p <= T.pointwise_constant && hk.sup_pointwise_r <= T.pointwise_constant);
  out.entries.push_back(pr);

  // gradients and Laplacians of eta powers
  LemmaReport l42;
  l42.id = "lemma_4_2";
  struct Item {
    const char* name;
    double kernels::PhaseSpaceNorms::*field;
    double expected;
  };
  // eta^(2) carries ||eta||^0, eta^(3) one more factor ell^{alpha/2}
  const Item items[] = {{"grad_eta2", &kernels::PhaseSpaceNorms::grad_eta2, half_alpha},
                        {"lap_eta2", &kernels::PhaseSpaceNorms::lap_eta2, half_alpha},
                        {"grad_eta3", &kernels::PhaseSpaceNorms::grad_eta3, P.alpha},
                        {"lap_eta3", &kernels::PhaseSpaceNorms::lap_eta3, P.alpha},
                        {"grad_p", &kernels::PhaseSpaceNorms::grad_p, half_alpha},
                        {"lap_p", &kernels::PhaseSpaceNorms::lap_p, half_alpha}};
  for (const auto& it : items) {
    const auto v = series([&](const EllPoint& p) { return p.ps.*(it.field); });
    for (std::size_t i = 0; i < P.ell.size(); ++i) l42.add(at(it.name, "ell", P.ell[i]), v[i]);
    const auto f = fit_slope_at_least(P.ell, v, it.expected - T.norm_slope_tol);
    add_fit(l42, it.name, f);
    l42.check(std::string(it.name) + "_slope", f.pass);
  }
  out.entries.push_back(l42);

  // cross gradient
  LemmaReport l43;
  l43.id = "lemma_4_3";
  const auto cross = series([](const EllPoint& p) { return p.ps.cross_gradient; });
  for (std::size_t i = 0; i < P.ell.size(); ++i) l43.add(at("cross_gradient", "ell", P.ell[i]), cross[i]);
  const auto cfit = fit_slope_at_least(P.ell, cross, P.alpha - T.cross_slope_margin);
  add_fit(l43, "cross_gradient", cfit);
  const auto c1 = kernels::phase_space_norms(eta0).cross_gradient;
  const auto c2 = kernels::phase_space_norms(eta0, 48, 16).cross_gradient;
  const double cchange = c2 == 0.0 ? std::abs(c1) : std::abs(c1 - c2) / c2;
  l43.add("reference_cross_gradient", c1);
  l43.add("reference_cross_gradient_refined", c2);
  l43.add("refinement_change", cchange);
  l43.add("lattice_cross_gradient", hk.cross_gradient);
  l43.check("cross_gradient_slope", cfit.pass);
  l43.check("finite", std::isfinite(c1));
  l43.check("refinement_stable", cchange <= T.cross_refinement);
  out.entries.push_back(l43);

  // h_N
  LemmaReport hn;
  hn.id = "h_N";
  bool young = true, decreasing = true;
  hn.add("ell", ells);
  for (std::size_t i = 0; i < nn; ++i) {
    const double N = P.n_sweep[i];
    hn.add(at("l2", "N", N), hrep[i].l2);
    hn.add(at("sup", "N", N), hrep[i].sup);
    hn.add(at("young_bound", "N", N), hrep[i].young_bound);
    hn.add(at("limit_defect", "N", N), hrep[i].limit_defect_ell);
    hn.add(at("limit_defect_full", "N", N), hrep[i].limit_defect_full);
    young = young && hrep[i].sup <= hrep[i].young_bound * (1.0 + 1e-12);
    if (i > 0) decreasing = decreasing && (hrep[i].limit_defect_full < hrep[i - 1].limit_defect_full ||
                                           hrep[i].limit_defect_full == 0.0);
  }
  hn.check("young_inequality", young);
  hn.check("limit_defect_decreasing_in_N", decreasing);
  out.entries.push_back(hn);
}

// -------------------------------------------------------------------- fock

struct SuitePair {
  fock::IdentitySuite fl, ex;
  bool exact_run = false;
};

void run_fock(const RunConfig& cfg, Bundle& out) {
  using namespace fock;
  const auto& P = cfg.fock;
  const auto& T = cfg.thresholds;
  const std::size_t ns = P.identity_spaces.size();

  auto tag = [](int m, int n) { return "(M=" + std::to_string(m) + ",N=" + std::to_string(n) + ")"; };
  auto exact_ok = [](int m, int n) {
    return FockSpace::binomial(m + n, m) <= kExactMaxDimension;
  };

  std::vector<SuitePair> ccr(ns), comm(ns), un(ns);
  parallel_for(ns, [&](std::size_t i) {
    const auto [m, n] = P.identity_spaces[i];
    ccr[i].fl = verify_ccr(m, n, NumericMode::Float);
    comm[i].fl = verify_b_commutators(m, n, NumericMode::Float, cfg.seed);
    un[i].fl = verify_un(m, n, NumericMode::Float);
    if (exact_ok(m, n)) {
      ccr[i].ex = verify_ccr(m, n, NumericMode::Exact);
      comm[i].ex = verify_b_commutators(m, n, NumericMode::Exact, cfg.seed);
      un[i].ex = verify_un(m, n, NumericMode::Exact);
      ccr[i].exact_run = comm[i].exact_run = un[i].exact_run = true;
    }
  });

  auto suite_entry = [&](const std::string& id, const std::vector<std::vector<SuitePair>*>& groups,
                         const std::vector<std::string>& names) {
    LemmaReport r;
    r.id = id;
    bool fl_ok = true, ex_ok = true;
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (std::size_t i = 0; i < ns; ++i) {
        const auto& sp = (*groups[g])[i];
        const auto [m, n] = P.identity_spaces[i];
        r.add(names[g] + "_float_max_deviation" + tag(m, n), sp.fl.worst());
        r.add(names[g] + "_identities" + tag(m, n), static_cast<double>(sp.fl.checks.size()));
        fl_ok = fl_ok && sp.fl.pass(T.fock_float);
        if (sp.exact_run) {
          r.add(names[g] + "_exact_max_deviation" + tag(m, n), sp.ex.worst());
          ex_ok = ex_ok && sp.ex.pass(0.0);
        }
      }
    r.check("float_within_tol", fl_ok);
    r.check("exact_identically_zero", ex_ok);
    return r;
  };
  out.entries.push_back(suite_entry("comm_b", {&ccr, &comm}, {"ccr", "b"}));
  out.entries.push_back(suite_entry("un_conjugation", {&un}, {"un"}));

  // excitation Hamiltonian
  LemmaReport ln;
  ln.id = "cLNj_identity";
  bool e_ok = true, lin_ok = true;
  std::vector<double> edev(ns), vdev(ns), adev(ns), lin(ns), res(ns);
  parallel_for(ns, [&](std::size_t i) {
    const auto [m, n] = P.identity_spaces[i];
    const auto c = random_coefficients(m, cfg.seed + static_cast<unsigned>(i));
    const auto e = energy_identity(c, n, P.energy_samples, cfg.seed);
    edev[i] = e.max_deviation;
    vdev[i] = e.vacuum_deviation;
    const auto a = gp_adapt(c, n);
    res[i] = a.residual;
    adev[i] = energy_identity(a.coeff, n, P.energy_samples, cfg.seed).max_deviation;
    lin[i] = linear_term_reduction(a.coeff, n);
  });
  for (std::size_t i = 0; i < ns; ++i) {
    const auto [m, n] = P.identity_spaces[i];
    ln.add("energy_deviation" + tag(m, n), edev[i]);
    ln.add("vacuum_deviation" + tag(m, n), vdev[i]);
    ln.add("adapted_energy_deviation" + tag(m, n), adev[i]);
    ln.add("gp_residual" + tag(m, n), res[i]);
    ln.add("linear_term_deviation" + tag(m, n), lin[i]);
    e_ok = e_ok && edev[i] <= T.energy_identity && vdev[i] <= T.energy_identity && adev[i] <= T.energy_identity;
    lin_ok = lin_ok && lin[i] <= T.energy_identity && res[i] <= T.energy_identity;
  }
  ln.add("samples", static_cast<double>(P.energy_samples));
  ln.check("energy_identity", e_ok);
  ln.check("linear_term_reduction", lin_ok);
  out.entries.push_back(ln);

  // generators
  const int M = P.growth_modes;
  const auto coeff = random_coefficients(M, cfg.seed);
  const Eigen::MatrixXd eta_hat = coeff.eta / coeff.eta.norm();
  const Eigen::MatrixXd nu = P.nu_norm * coeff.nu / coeff.nu.norm();
  const Eigen::MatrixXd gmat = coeff.g;

  // saturation: sup over the grid, and the last step in n_cap no larger than the first
  auto growth_entry = [&](const std::string& id, const GrowthTable& t) {
    LemmaReport r;
    r.id = id;
    bool bounded = true, saturating = true, exact_one = true;
    for (int p : P.powers) {
      std::vector<double> col;
      for (int nc : P.n_caps) {
        col.push_back(t.sup(p, nc));
        r.add("sup_ratio@n=" + std::to_string(p) + ",N_cap=" + std::to_string(nc), col.back());
      }
      bounded = bounded && max_of(col) <= T.growth_constant;
      if (col.size() >= 3) saturating = saturating && (col.back() - col[col.size() - 2]) <= (col[1] - col[0]) + 1e-12;
    }
    for (const auto& e : t.entries)
      if (e.scale == 0.0) exact_one = exact_one && e.ratio == 1.0;
    r.check("bounded_by_common_constant", bounded);
    r.check("saturating_in_N_cap", saturating);
    r.check("zero_generator_ratio_exactly_1", exact_one);
    r.check("monotone_in_generator_norm", monotone_in_scale(t));
    return r;
  };

  GrowthTable bt, at_;
  parallel_for(2, [&](std::size_t k) {
    if (k == 0) bt = B_growth(M, P.n_caps, eta_hat, P.eta_norms, P.powers);
    else at_ = A_growth(M, P.n_caps, nu, gmat, P.t_grid, P.powers);
  });

  // unitarity, antisymmetry and spectrum invariance at the largest n_cap
  const int ncap_max = *std::max_element(P.n_caps.begin(), P.n_caps.end());
  auto space = std::make_shared<const FockSpace>(M, ncap_max);
  const auto B = build_B(space, max_of(P.eta_norms) * eta_hat);
  const auto A = build_A(space, nu, gmat);
  const auto eB = exp_generator(B);
  const auto eA = exp_generator(A);
  const auto H = build_HN(coeff, space);

  auto l23 = growth_entry("lemma_2_3", bt);
  l23.add("max_eta_norm", max_of(P.eta_norms));
  l23.add("antisymmetry_defect", (B + B.adjoint()).max_abs());
  l23.add("unitarity_defect", eB.unitarity_defect);
  l23.add("expm_backward_error_bound", eB.info.backward_error_bound);
  l23.add("spectrum_shift", spectrum_shift(H, eB.U));
  l23.check("antisymmetric", (B + B.adjoint()).max_abs() == 0.0);
  l23.check("unitary", eB.unitarity_defect <= T.unitarity);
  l23.check("spectrum_invariant", spectrum_shift(H, eB.U) <= T.spectrum_invariance);
  out.entries.push_back(l23);

  auto l26 = growth_entry("lemma_2_6", at_);
  l26.add("nu_norm", P.nu_norm);
  l26.add("antisymmetry_defect", (A + A.adjoint()).max_abs());
  l26.add("unitarity_defect", eA.unitarity_defect);
  l26.add("spectrum_shift", spectrum_shift(H, eA.U));
  const auto zero_A = build_A(space, Eigen::MatrixXd::Zero(M, M), gmat);
  l26.check("antisymmetric", (A + A.adjoint()).max_abs() <= 1e-13);
  l26.check("unitary", eA.unitarity_defect <= T.unitarity);
  l26.check("spectrum_invariant", spectrum_shift(H, eA.U) <= T.spectrum_invariance);
  l26.check("zero_nu_gives_zero_A", zero_A.exactly_zero());
  out.entries.push_back(l26);

  // d_eta
  LemmaReport dd;
  dd.id = "defd";
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eta_hat);
  Eigen::Index top = 0;
  es.eigenvalues().cwiseAbs().maxCoeff(&top);
  const Eigen::VectorXcd f = es.eigenvectors().col(top).cast<Complex>();
  const Eigen::MatrixXd eta_d = P.d_eta_norm * eta_hat;
  std::vector<double> scaled(P.n_caps.size());
  std::vector<double> zero_d(P.n_caps.size());
  parallel_for(P.n_caps.size(), [&](std::size_t i) {
    auto sp = std::make_shared<const FockSpace>(M, P.n_caps[i]);
    scaled[i] = compute_d_eta(sp, eta_d, f).ratio * P.n_caps[i];
    zero_d[i] = compute_d_eta(sp, Eigen::MatrixXd::Zero(M, M), f).max_abs;
  });
  bool zero_ok = true;
  for (std::size_t i = 0; i < P.n_caps.size(); ++i) {
    dd.add("ratio_times_N_cap@N_cap=" + std::to_string(P.n_caps[i]), scaled[i]);
    zero_ok = zero_ok && zero_d[i] == 0.0;
  }
  const bool d_sat = scaled.size() < 3 ||
                     scaled.back() - scaled[scaled.size() - 2] <= scaled[1] - scaled[0] + 1e-12;
  auto sp3 = std::make_shared<const FockSpace>(M, std::min(3, ncap_max));
  const auto bch = bch_second_order(sp3, eta_hat, f, P.bch_scale);
  dd.add("eta_norm", P.d_eta_norm);
  dd.add("bch_defect", bch.defect_s);
  dd.add("bch_defect_half", bch.defect_half);
  dd.add("bch_halving_ratio", bch.ratio);
  dd.check("ratio_times_N_cap_bounded", max_of(scaled) <= T.d_eta_constant);
  dd.check("ratio_times_N_cap_saturating", d_sat);
  dd.check("zero_eta_gives_zero_d", zero_ok);
  dd.check("bch_third_order", bch.ratio >= T.bch_ratio_lo && bch.ratio <= T.bch_ratio_hi);
  out.entries.push_back(dd);
}

}  // namespace

bool RunConfig::enabled(const std::string& stage) const {
  return std::find(pipeline.begin(), pipeline.end(), stage) != pipeline.end();
}

std::vector<std::string> upstream_of(const std::string& stage) {
  if (stage == "gp") return {"scatter"};
  if (stage == "kernels") return {"scatter", "gp"};
  return {};
}

RunConfig default_config() {
  RunConfig c;
  c.scatter.interaction = default_interaction();
  c.gp.trap = default_trap();
  return c;
}

RunConfig parse_config(const json& j) {
  RunConfig c = default_config();
  Reader top(j, "config");
  top.get("schema_version", c.schema_version);
  if (!top.has("schema_version")) fail(ErrorKind::ConfigError, "config lacks schema_version");
  if (c.schema_version != kSchemaVersion)
    fail(ErrorKind::ConfigError, "unsupported schema_version " + std::to_string(c.schema_version) +
                                     " (expected " + std::to_string(kSchemaVersion) + ")");
  top.get("pipeline", c.pipeline);
  top.get("seed", c.seed);
  top.get("report_name", c.report_name);
  if (top.has("scatter")) {
    Reader r(top.sub("scatter"), "scatter");
    r.raw("interaction", c.scatter.interaction);
    r.get("r_max", c.scatter.r_max);
    r.get("n_pts", c.scatter.n_pts);
    r.get("ell", c.scatter.ell);
    r.get("n_ell", c.scatter.n_ell);
    r.get("neumann_pts", c.scatter.neumann_pts);
    r.get("reference_n_ell", c.scatter.reference_n_ell);
    r.finish();
  }
  if (top.has("gp")) {
    Reader r(top.sub("gp"), "gp");
    r.raw("trap", c.gp.trap);
    r.get("tol", c.gp.tol);
    r.get("spacing", c.gp.spacing);
    r.finish();
  }
  if (top.has("kernels")) {
    Reader r(top.sub("kernels"), "kernels");
    auto& k = c.kernels;
    r.get("alpha", k.alpha);
    r.get("beta", k.beta);
    r.get("ell", k.ell);
    r.get("slope_N", k.slope_N);
    r.get("reference_ell", k.reference_ell);
    r.get("reference_n_ell", k.reference_n_ell);
    r.get("n_sweep_ell", k.n_sweep_ell);
    r.get("n_sweep", k.n_sweep);
    r.get("lattice_side", k.lattice_side);
    r.get("samples", k.samples);
    r.get("series_tol", k.series_tol);
    r.finish();
  }
  if (top.has("fock")) {
    Reader r(top.sub("fock"), "fock");
    auto& f = c.fock;
    r.get("identity_spaces", f.identity_spaces);
    r.get("energy_samples", f.energy_samples);
    r.get("growth_modes", f.growth_modes);
    r.get("n_caps", f.n_caps);
    r.get("powers", f.powers);
    r.get("eta_norms", f.eta_norms);
    r.get("t_grid", f.t_grid);
    r.get("nu_norm", f.nu_norm);
    r.get("d_eta_norm", f.d_eta_norm);
    r.get("bch_scale", f.bch_scale);
    r.finish();
  }
  if (top.has("thresholds")) {
    Reader r(top.sub("thresholds"), "thresholds");
    each_threshold(c.thresholds, [&](const char* name, double& v) { r.get(name, v); });
    r.finish();
  }
  top.finish();

  // DAG: known stages, no repeats, upstream listed earlier
  std::set<std::string> seen;
  for (const auto& s : c.pipeline) {
    if (std::find(kStages.begin(), kStages.end(), s) == kStages.end())
      fail(ErrorKind::ConfigError, "unknown stage '" + s + "'");
    if (seen.count(s)) fail(ErrorKind::ConfigError, "stage '" + s + "' listed twice");
    for (const auto& up : upstream_of(s)) {
      if (!c.enabled(up))
        fail(ErrorKind::ConfigError, "stage '" + s + "' needs upstream stage '" + up + "', which is not in the pipeline");
      if (!seen.count(up))
        fail(ErrorKind::ConfigError, "stage '" + s + "' is listed before its upstream stage '" + up + "'");
    }
    seen.insert(s);
  }

  const auto& k = c.kernels;
  require(k.ell.size() >= 3 && c.scatter.n_ell.size() >= 3 && k.n_sweep.size() >= 3, ErrorKind::ConfigError,
          "sweeps need at least three points");
  require(!c.fock.n_caps.empty() && !c.fock.identity_spaces.empty(), ErrorKind::ConfigError,
          "fock sweeps must not be empty");
  require(c.fock.growth_modes >= 1 && c.fock.energy_samples >= 1, ErrorKind::ConfigError,
          "fock.growth_modes and fock.energy_samples must be positive");
  for (int p : c.fock.powers)
    require(p >= -2 && p <= 2, ErrorKind::ConfigError, "fock.powers must lie in -2..2");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ConfigError, "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, "cannot parse " + path + ": " + e.what());
  }
  return parse_config(j);
}

ojson to_json(const RunConfig& c) {
  ojson j;
  j["schema_version"] = c.schema_version;
  j["pipeline"] = c.pipeline;
  j["seed"] = c.seed;
  j["report_name"] = c.report_name;
  j["scatter"] = {{"interaction", c.scatter.interaction}, {"r_max", c.scatter.r_max},
                  {"n_pts", c.scatter.n_pts},             {"ell", c.scatter.ell},
                  {"n_ell", c.scatter.n_ell},             {"neumann_pts", c.scatter.neumann_pts},
                  {"reference_n_ell", c.scatter.reference_n_ell}};
  j["gp"] = {{"trap", c.gp.trap}, {"tol", c.gp.tol}, {"spacing", c.gp.spacing}};
  const auto& k = c.kernels;
  j["kernels"] = {{"alpha", k.alpha},       {"beta", k.beta},
                  {"ell", k.ell},           {"slope_N", k.slope_N},
                  {"reference_ell", k.reference_ell}, {"reference_n_ell", k.reference_n_ell},
                  {"n_sweep_ell", k.n_sweep_ell},     {"n_sweep", k.n_sweep},
                  {"lattice_side", k.lattice_side},   {"samples", k.samples},
                  {"series_tol", k.series_tol}};
  const auto& f = c.fock;
  j["fock"] = {{"identity_spaces", f.identity_spaces}, {"energy_samples", f.energy_samples},
               {"growth_modes", f.growth_modes},       {"n_caps", f.n_caps},
               {"powers", f.powers},                   {"eta_norms", f.eta_norms},
               {"t_grid", f.t_grid},                   {"nu_norm", f.nu_norm},
               {"d_eta_norm", f.d_eta_norm},           {"bch_scale", f.bch_scale}};
  ojson t = ojson::object();
  Thresholds copy = c.thresholds;
  each_threshold(copy, [&](const char* name, double& v) { t[name] = v; });
  j["thresholds"] = t;
  return j;
}

bool Bundle::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const LemmaReport& r) { return r.pass(); });
}

const LemmaReport* Bundle::find(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return &e;
  return nullptr;
}

Bundle run(const RunConfig& cfg, const Progress& progress) {
  Bundle b;
  std::optional<ScatterOut> sc;
  std::optional<GpOut> g;
  for (const auto& stage : cfg.pipeline) {
    if (progress) progress(stage);
    try {
      if (stage == "scatter") sc = run_scatter(cfg, b);
      else if (stage == "gp") g = run_gp(cfg, *sc, b);
      else if (stage == "kernels") run_kernels(cfg, *sc, *g, b);
      else if (stage == "fock") run_fock(cfg, b);
    } catch (const Error& e) {
      throw Error(e.kind(), "stage '" + stage + "' failed: " + e.what(), e.residual());
    }
  }
  return b;
}

ojson bundle_json(const Bundle& b, const RunConfig& cfg, const std::string& timestamp) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["timestamp"] = timestamp;
  j["seed"] = cfg.seed;
  j["pass"] = b.pass();
  j["config"] = to_json(cfg);
  auto& e = j["entries"] = ojson::array();
  for (const auto& r : b.entries) e.push_back(to_json(r));
  return j;
}

std::string bundle_csv(const Bundle& b) {
  std::ostringstream os;
  os << "entry,kind,name,value\n";
  char buf[40];
  for (const auto& r : b.entries) {
    for (const auto& [name, v] : r.quantities) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << r.id << ",quantity,\"" << name << "\"," << buf << "\n";
    }
    for (const auto& [name, ok] : r.checks) os << r.id << ",check,\"" << name << "\"," << (ok ? 1 : 0) << "\n";
  }
  return os.str();
}

Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  fail(ErrorKind::InvalidInput, "unknown format '" + s + "' (expected json or csv)");
}

std::string write_bundle(const Bundle& b, const RunConfig& cfg, const std::string& dir, Format format) {
  std::filesystem::create_directories(dir);
  const auto path =
      (std::filesystem::path(dir) / (cfg.report_name + (format == Format::Json ? ".json" : ".csv"))).string();
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidInput, "cannot write " + path);
  if (format == Format::Json) {
    char ts[32];
    const std::time_t now = std::time(nullptr);
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << bundle_json(b, cfg, ts).dump(2) << "\n";
  } else {
    out << bundle_csv(b);
  }
  return path;
}

unsigned thread_budget() {
  if (const char* env = std::getenv("GPREGIME_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) fail(ErrorKind::InvalidInput, std::string("GPREGIME_THREADS must be a positive integer, got '") + env + "'");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(thread_budget(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace gpregime::pipeline
