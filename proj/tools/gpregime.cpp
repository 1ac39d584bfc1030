// gpregime: command line driver for the numerics toolkit.
//
//   gpregime run --config cfg.json --out dir/
//   gpregime scatter | gp | kernels | fock ...
//
// Exit codes: 0 all checks pass, 1 some check failed, 2 error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gpregime/error.hpp"
#include "gpregime/fock_generators.hpp"
#include "gpregime/fock_identities.hpp"
#include "gpregime/gp.hpp"
#include "gpregime/kernels.hpp"
#include "gpregime/pipeline.hpp"
#include "gpregime/potentials.hpp"
#include "gpregime/scattering.hpp"
#include "gpregime/slope.hpp"

using namespace gpregime;
using json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidInput, "cannot write " + path);
  out << text;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, "cannot parse " + path + ": " + e.what());
  }
}

json default_well() {
  return json{{"kind", "square_well"}, {"parameters", {{"V0", 2.0}, {"R", 1.0}}}, {"grid", {{"n_pts", 2001}}}};
}

json default_trap() { return json{{"kind", "harmonic"}, {"grid", {{"n_pts", 2048}, {"r_max", 12.0}}}}; }

potentials::InteractionPotential interaction_of(const json& j) {
  auto any = potentials::potential_from_json(nlohmann::json::parse(j.dump()));
  if (!std::holds_alternative<potentials::InteractionPotential>(any))
    fail(ErrorKind::ConfigError, "expected an interaction potential");
  return std::get<potentials::InteractionPotential>(any);
}

potentials::TrapPotential trap_of(const json& j) {
  auto any = potentials::potential_from_json(nlohmann::json::parse(j.dump()));
  if (!std::holds_alternative<potentials::TrapPotential>(any)) fail(ErrorKind::ConfigError, "expected a trap");
  return std::get<potentials::TrapPotential>(any);
}

json report_json(const LemmaReport& r) { return json::parse(to_json(r).dump()); }

// ----------------------------------------------------------------- scatter

struct ScatterArgs {
  std::string potential;
  double ell = 0.5;
  std::vector<double> n = {200};
  std::size_t n_pts = 1024;
  double r_max = 40.0;
  std::string out;
};

int cmd_scatter(const ScatterArgs& a, pipeline::Format format) {
  const json pj = a.potential.empty() ? default_well() : read_json(a.potential);
  const auto v = interaction_of(pj);
  const auto ref = scattering::solve_zero_energy(v, a.r_max, 4096);
  json j;
  j["potential"] = pj;
  j["a0"] = ref.a0;
  j["a0_matching"] = ref.a0_matching;
  j["identity_defect"] = ref.identity_defect();
  j["ell"] = a.ell;
  std::ostringstream csv;
  csv << "ell,N,N_ell,lambda_ell,i_deviation,ii_scaled_defect,iii_volume_deviation_scaled,iv_sup_p2_w_hat\n";
  bool ok = true;
  auto& runs = j["runs"] = json::array();
  for (double N : a.n) {
    const auto sol = scattering::solve_neumann(v, a.ell, N, a.n_pts);
    const auto rep = scattering::verify_lemma_scattering(sol, ref);
    ok = ok && rep.pass();
    json r;
    r["N"] = N;
    r["lambda_ell"] = sol.lambda_ell;
    r["lemma30"] = {{"i", rep.value("i_deviation")},
                    {"ii", rep.value("ii_scaled_defect")},
                    {"iii", rep.value("iii_volume_deviation_scaled")},
                    {"iv", rep.value("iv_sup_p2_w_hat")}};
    r["report"] = report_json(rep);
    r["grid"] = {{"n_pts", a.n_pts}, {"radius", sol.radius}};
    runs.push_back(r);
    csv << a.ell << "," << N << "," << fmt(sol.radius) << "," << fmt(sol.lambda_ell) << ","
        << fmt(rep.value("i_deviation")) << "," << fmt(rep.value("ii_scaled_defect")) << ","
        << fmt(rep.value("iii_volume_deviation_scaled")) << "," << fmt(rep.value("iv_sup_p2_w_hat")) << "\n";
  }
  emit(a.out, format == pipeline::Format::Json ? j.dump(2) + "\n" : csv.str());
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------- gp

struct GpArgs {
  std::string trap;
  double a0 = 0.0;
  double tol = 1e-8;
  std::string out;
};

int cmd_gp(const GpArgs& a, pipeline::Format format) {
  const json tj = a.trap.empty() ? default_trap() : read_json(a.trap);
  const auto trap = trap_of(tj);
  gp::MinimizeOptions opt;
  opt.tol = a.tol;
  const auto s = gp::minimize_gp(trap, a.a0, gp::default_grid(trap), opt);
  if (format == pipeline::Format::Csv) {
    std::ostringstream csv;
    csv << "r,phi\n";
    for (std::size_t i = 0; i < s.r.size(); ++i) csv << fmt(s.r[i]) << "," << fmt(s.phi[i]) << "\n";
    emit(a.out, csv.str());
    return 0;
  }
  const auto sp = gp::hgp_spectrum(s, trap, 4);
  json j;
  j["trap"] = tj;
  j["a0"] = a.a0;
  j["tol"] = a.tol;
  j["energies"] = {{"kinetic", s.energy.kinetic},
                   {"trap", s.energy.trap},
                   {"interaction", s.energy.interaction},
                   {"total", s.energy.total}};
  j["eps_gp"] = s.eps_gp;
  j["residual"] = s.residual;
  j["iterations"] = s.iterations;
  j["spectrum"] = {{"lambda0", sp.eigenvalues[0]}, {"lambda1", sp.gap}};
  auto& d = j["decay"] = json::object();
  for (double nu : {1.0, 2.0, 4.0}) {
    const auto r = gp::verify_decay(s, nu);
    d["nu=" + std::to_string(static_cast<int>(nu))] = {
        {"C_phi", r.c_phi}, {"C_dphi", r.c_dphi}, {"C_laplacian", r.c_laplacian}, {"pass", r.pass}};
  }
  emit(a.out, j.dump(2) + "\n");
  return s.residual <= a.tol ? 0 : 1;
}

// ----------------------------------------------------------------- kernels

struct KernelArgs {
  std::string scatter;
  std::string gp;
  double alpha = 4.0;
  double beta = 2.0;
  std::string sweep = "ell=0.5,0.25,0.125";
  double N = 1e6;
  std::string out;
};

std::vector<double> parse_sweep(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || s.substr(0, eq) != "ell")
    fail(ErrorKind::InvalidInput, "sweep must look like ell=0.5,0.25,0.125");
  std::vector<double> out;
  std::stringstream ss(s.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidInput, "bad sweep value '" + item + "'");
    }
  }
  return out;
}

int cmd_kernels(const KernelArgs& a, pipeline::Format format) {
  const json sj = a.scatter.empty() ? json{{"potential", default_well()}} : read_json(a.scatter);
  const json gj = a.gp.empty() ? json{{"trap", default_trap()}, {"tol", 1e-8}} : read_json(a.gp);
  const auto v = interaction_of(sj.at("potential"));
  const auto trap = trap_of(gj.at("trap"));
  const double a0 = gj.contains("a0") && !a.gp.empty() ? gj.at("a0").get<double>()
                                                       : scattering::solve_zero_energy(v, 40.0, 4096).a0;
  gp::MinimizeOptions opt;
  opt.tol = gj.value("tol", 1e-8);
  const auto state = gp::minimize_gp(trap, a0, gp::default_grid(trap), opt);
  const auto ells = parse_sweep(a.sweep);

  std::vector<kernels::NormReport> eta(ells.size());
  std::vector<kernels::NuNormReport> nu(ells.size());
  std::vector<kernels::PhaseSpaceNorms> ps(ells.size());
  pipeline::parallel_for(ells.size(), [&](std::size_t i) {
    const auto sol = scattering::solve_neumann(v, ells[i], a.N, 1024);
    const auto G = kernels::build_G(sol);
    const auto cut = kernels::make_cutoff(ells[i], a.alpha, a.beta);
    const auto e = kernels::build_eta_H(G, state, cut);
    eta[i] = kernels::eta_norms(e);
    nu[i] = kernels::nu_norms(kernels::build_nu_H(G, state, cut));
    ps[i] = kernels::phase_space_norms(e);
  });

  std::ostringstream csv;
  csv << "ell,N,eta_norm,nu_norm,grad1_norm,p_norm,r_norm,cross_gradient,lowpass_l2\n";
  std::vector<double> en, nn, pn, rn, cg, l2;
  for (std::size_t i = 0; i < ells.size(); ++i) {
    en.push_back(eta[i].eta_norm);
    nn.push_back(nu[i].nu_norm);
    pn.push_back(ps[i].p_norm);
    rn.push_back(ps[i].r_norm);
    cg.push_back(ps[i].cross_gradient);
    l2.push_back(kernels::build_gaussian_lowpass(ells[i], a.beta).l2_norm);
    csv << ells[i] << "," << a.N << "," << fmt(en[i]) << "," << fmt(nn[i]) << "," << fmt(eta[i].grad1_norm) << ","
        << fmt(pn[i]) << "," << fmt(rn[i]) << "," << fmt(cg[i]) << "," << fmt(l2[i]) << "\n";
  }
  if (format == pipeline::Format::Csv) {
    emit(a.out, csv.str());
    return 0;
  }
  json j;
  j["alpha"] = a.alpha;
  j["beta"] = a.beta;
  j["N"] = a.N;
  j["ell"] = ells;
  j["eta_norm"] = en;
  j["nu_norm"] = nn;
  j["p_norm"] = pn;
  j["r_norm"] = rn;
  j["cross_gradient"] = cg;
  bool ok = true;
  auto& s = j["slopes"] = json::object();
  auto put = [&](const char* name, const SlopeFit& f, double expected) {
    s[name] = {{"slope", f.slope}, {"expected", expected}, {"pass", f.pass}};
    ok = ok && f.pass;
  };
  if (ells.size() >= 3) {
    put("eta_norm", fit_slope(ells, en, a.alpha / 2, 0.2), a.alpha / 2);
    put("nu_norm", fit_slope(ells, nn, a.alpha / 2, 0.2), a.alpha / 2);
    put("p_norm", fit_slope_at_least(ells, pn, a.alpha - 0.3), a.alpha - 0.3);
    put("r_norm", fit_slope_at_least(ells, rn, a.alpha - 0.3), a.alpha - 0.3);
    put("cross_gradient", fit_slope_at_least(ells, cg, a.alpha - 0.5), a.alpha - 0.5);
    put("lowpass_l2", fit_slope(ells, l2, -1.5 * a.beta, 0.05), -1.5 * a.beta);
  }
  emit(a.out, j.dump(2) + "\n");
  return ok ? 0 : 1;
}

// -------------------------------------------------------------------- fock

struct FockArgs {
  int modes = 3;
  int ncap = 4;
  unsigned seed = 7;
  std::string suite = "ccr";
  bool exact = false;
  std::string out;
};

int cmd_fock(const FockArgs& a, pipeline::Format format) {
  using namespace fock;
  const auto mode = a.exact ? NumericMode::Exact : NumericMode::Float;
  std::vector<std::pair<std::string, double>> rows;
  bool ok = true;
  auto add_suite = [&](const IdentitySuite& s) {
    for (const auto& c : s.checks) rows.emplace_back(c.name, c.max_deviation);
    ok = ok && s.pass(1e-12);
  };
  if (a.suite == "ccr") {
    add_suite(verify_ccr(a.modes, a.ncap, mode));
    add_suite(verify_b_commutators(a.modes, a.ncap, mode, a.seed));
  } else if (a.suite == "un") {
    add_suite(verify_un(a.modes, a.ncap, mode));
  } else if (a.suite == "ln") {
    const auto c = random_coefficients(a.modes, a.seed);
    const auto e = energy_identity(c, a.ncap, 20, a.seed);
    const auto g = gp_adapt(c, a.ncap);
    rows.emplace_back("<psi,H psi> - <U psi, L U psi>", e.max_deviation);
    rows.emplace_back("condensate energy - <vac, L vac>", e.vacuum_deviation);
    rows.emplace_back("GP residual after rotation", g.residual);
    rows.emplace_back("linear term reduction", linear_term_reduction(g.coeff, a.ncap));
    for (const auto& r : rows) ok = ok && r.second <= 1e-10;
  } else if (a.suite == "bgrowth" || a.suite == "agrowth") {
    const auto c = random_coefficients(a.modes, a.seed);
    std::vector<int> caps;
    for (int n = 2; n <= a.ncap; ++n) caps.push_back(n);
    const std::vector<int> powers = {-2, -1, 1, 2};
    const auto t = a.suite == "bgrowth"
                       ? B_growth(a.modes, caps, c.eta / c.eta.norm(), {0.0, 0.1, 0.2, 0.3}, powers)
                       : A_growth(a.modes, caps, 0.1 * c.nu / c.nu.norm(), c.g, {-1, -0.5, 0, 0.5, 1}, powers);
    for (const auto& e : t.entries)
      rows.emplace_back("ratio n=" + std::to_string(e.power) + " N_cap=" + std::to_string(e.n_cap) +
                            " scale=" + fmt(e.scale),
                        e.ratio);
    ok = monotone_in_scale(t);
  } else if (a.suite == "deta") {
    const auto c = random_coefficients(a.modes, a.seed);
    const Eigen::MatrixXd eta = c.eta / c.eta.norm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eta);
    Eigen::Index top = 0;
    es.eigenvalues().cwiseAbs().maxCoeff(&top);
    const Eigen::VectorXcd f = es.eigenvectors().col(top).cast<Complex>();
    for (int n = 2; n <= a.ncap; ++n) {
      auto sp = std::make_shared<const FockSpace>(a.modes, n);
      rows.emplace_back("ratio*N_cap N_cap=" + std::to_string(n), compute_d_eta(sp, 0.2 * eta, f).ratio * n);
    }
    auto sp = std::make_shared<const FockSpace>(a.modes, a.ncap);
    const auto b = bch_second_order(sp, eta, f, 0.2);
    rows.emplace_back("BCH defect halving ratio", b.ratio);
  } else {
    fail(ErrorKind::InvalidInput, "unknown suite '" + a.suite + "'");
  }

  if (format == pipeline::Format::Csv) {
    std::ostringstream csv;
    csv << "identity,max_deviation\n";
    for (const auto& [name, v] : rows) csv << "\"" << name << "\"," << fmt(v) << "\n";
    emit(a.out, csv.str());
  } else {
    json j;
    j["modes"] = a.modes;
    j["n_cap"] = a.ncap;
    j["seed"] = a.seed;
    j["suite"] = a.suite;
    j["mode"] = a.exact ? "exact" : "float";
    auto& arr = j["identities"] = json::array();
    for (const auto& [name, v] : rows) arr.push_back({{"name", name}, {"value", v}});
    j["pass"] = ok;
    emit(a.out, j.dump(2) + "\n");
  }
  return ok ? 0 : 1;
}

// --------------------------------------------------------------------- run

int cmd_run(const std::string& config, const std::string& out, pipeline::Format format) {
  const auto cfg = config.empty() ? pipeline::default_config() : pipeline::load_config(config);
  const auto bundle = pipeline::run(cfg, [](const std::string& stage) { std::cerr << "stage " << stage << "\n"; });
  const auto path = pipeline::write_bundle(bundle, cfg, out, format);
  for (const auto& e : bundle.entries) std::cerr << (e.pass() ? "PASS " : "FAIL ") << e.id << "\n";
  std::cerr << "wrote " << path << "\n";
  return bundle.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gross-Pitaevskii regime numerics toolkit"};
  app.require_subcommand(1);
  // subcommands hand --format up to the app, so it goes before or after the subcommand
  app.fallthrough();
  std::string format_name = "json";
  app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"json", "csv"}));

  std::string run_config, run_out = "out";
  auto* run = app.add_subcommand("run", "Run a configured pipeline and write the report bundle");
  run->add_option("--config", run_config, "Config JSON (defaults built in when omitted)");
  run->add_option("--out", run_out, "Output directory");

  ScatterArgs sa;
  auto* scatter = app.add_subcommand("scatter", "Scattering length and Neumann problem");
  scatter->add_option("--potential", sa.potential, "Potential JSON");
  scatter->add_option("--ell", sa.ell, "ell in (0,1)");
  scatter->add_option("--n", sa.n, "N values (comma separated)")->delimiter(',');
  scatter->add_option("--n-pts", sa.n_pts, "Radial grid points");
  scatter->add_option("--out", sa.out, "Output file (stdout when omitted)");

  GpArgs ga;
  auto* gpc = app.add_subcommand("gp", "Minimise the GP functional");
  gpc->add_option("--trap", ga.trap, "Trap JSON");
  gpc->add_option("--a0", ga.a0, "Scattering length");
  gpc->add_option("--tol", ga.tol, "Euler-Lagrange residual tolerance");
  gpc->add_option("--out", ga.out, "Output file");

  KernelArgs ka;
  auto* kern = app.add_subcommand("kernels", "Correlation kernels and their ell scaling");
  kern->add_option("--scatter", ka.scatter, "Output of `gpregime scatter`");
  kern->add_option("--gp", ka.gp, "Output of `gpregime gp`");
  kern->add_option("--alpha", ka.alpha, "UV cutoff exponent, P = ell^-alpha");
  kern->add_option("--beta", ka.beta, "Low-pass width exponent");
  kern->add_option("--sweep", ka.sweep, "ell=v1,v2,...");
  kern->add_option("--N", ka.N, "N for the sweep");
  kern->add_option("--out", ka.out, "Output file");

  FockArgs fa;
  auto* fockc = app.add_subcommand("fock", "Truncated Fock space identities");
  fockc->add_option("--modes", fa.modes, "Number of modes M");
  fockc->add_option("--ncap", fa.ncap, "Particle cap N_cap");
  fockc->add_option("--seed", fa.seed, "RNG seed");
  fockc->add_option("--suite", fa.suite)->check(CLI::IsMember({"ccr", "un", "ln", "bgrowth", "agrowth", "deta"}));
  fockc->add_flag("--exact", fa.exact, "Exact arithmetic (dimension <= 200)");
  fockc->add_option("--out", fa.out, "Output file");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto format = pipeline::parse_format(format_name);
    pipeline::thread_budget();
    if (*run) return cmd_run(run_config, run_out, format);
    if (*scatter) return cmd_scatter(sa, format);
    if (*gpc) return cmd_gp(ga, format);
    if (*kern) return cmd_kernels(ka, format);
    if (*fockc) return cmd_fock(fa, format);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what();
    if (e.residual() != 0.0) std::cerr << " (residual " << e.residual() << ")";
    std::cerr << "\n";
    return 2;
  }
  return 2;
}
