#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gpregime/report.hpp"

namespace gpregime::pipeline {

inline constexpr int kSchemaVersion = 1;

struct ScatterParams {
  nlohmann::ordered_json interaction;  ///< potential JSON {kind, parameters, grid}
  double r_max = 40.0;
  std::size_t n_pts = 4096;
  double ell = 0.5;
  std::vector<double> n_ell = {25, 50, 100, 200, 400};
  std::size_t neumann_pts = 1024;
  double reference_n_ell = 100;  ///< used for the w_hat refinement check
};

struct GpParams {
  nlohmann::ordered_json trap;  ///< potential JSON for the trap
  double tol = 1e-8;
  double spacing = 0.02;  ///< grid spacing h; r_max from the trap default
};

struct KernelParams {
  double alpha = 4.0;
  double beta = 2.0;
  std::vector<double> ell = {0.5, 0.25, 0.125};
  /// N for the ell sweeps; large enough that ell^{-alpha} stays below N / R
  /// at every ell of the sweep.
  double slope_N = 1e6;
  /// Reference kernel for the lattice and pointwise checks.
  double reference_ell = 0.5;
  double reference_n_ell = 100;
  /// N sweep for the sqrt(N) gradient constant and h_N, at an ell with
  /// ell^{-alpha} well below the smallest N.
  double n_sweep_ell = 0.75;
  std::vector<double> n_sweep = {50, 100, 200};
  int lattice_side = 8;
  std::size_t samples = 100;
  double series_tol = 1e-14;
};

struct FockParams {
  std::vector<std::pair<int, int>> identity_spaces = {{2, 3}, {3, 3}, {3, 4}};
  std::size_t energy_samples = 20;
  int growth_modes = 3;
  std::vector<int> n_caps = {2, 3, 4, 5, 6};
  std::vector<int> powers = {-2, -1, 1, 2};
  std::vector<double> eta_norms = {0.0, 0.1, 0.2, 0.3};
  std::vector<double> t_grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
  double nu_norm = 0.1;
  double d_eta_norm = 0.2;
  double bch_scale = 0.2;
};

/// Pass/fail thresholds. The source of the bounds gives no constants, so
/// every value here is an artifact choice.
struct Thresholds {
  double a0_rel = 1e-6;
  double identity_rel = 1e-6;
  double lemma30_i_slope = -1.0;
  double lemma30_i_slope_tol = 0.15;
  double lemma30_ii_spread = 3.0;
  double lemma30_iii_volume = 5.0;
  double refinement_rel = 0.10;
  double gp_energy_abs = 1e-4;
  double gp_l2_abs = 1e-4;
  double gp_eps_abs = 1e-10;
  double gap_lambda0_rel = 1e-6;
  double gap_overlap = 1e-8;
  double oscillator_gap_abs = 1e-3;
  double lowpass_l1_abs = 1e-8;
  double lowpass_slope_tol = 0.05;
  double norm_slope_tol = 0.2;
  double hyperbolic_slope_margin = 0.3;
  double cross_slope_margin = 0.5;
  double grad_stability = 0.20;
  double cross_refinement = 0.20;
  double factorization_rel = 0.01;
  double pointwise_constant = 10.0;
  double fock_float = 1e-12;
  double energy_identity = 1e-10;
  double spectrum_invariance = 1e-10;
  double unitarity = 1e-12;
  double growth_constant = 4.0;
  double d_eta_constant = 1.0;
  double bch_ratio_lo = 6.0;
  double bch_ratio_hi = 10.0;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::vector<std::string> pipeline = {"scatter", "gp", "kernels", "fock"};
  unsigned seed = 7;
  ScatterParams scatter;
  GpParams gp;
  KernelParams kernels;
  FockParams fock;
  Thresholds thresholds;
  std::string report_name = "report";

  bool enabled(const std::string& stage) const;
};

RunConfig default_config();
/// Fills defaults for absent keys; throws ConfigError on unknown stages,
/// wrong schema version, malformed values or a stage whose upstream is
/// missing.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Upstream stages each stage reads from.
std::vector<std::string> upstream_of(const std::string& stage);

struct Bundle {
  std::vector<LemmaReport> entries;
  bool pass() const;
  const LemmaReport* find(const std::string& id) const;
};

/// Progress callback: stage name when a stage starts.
using Progress = std::function<void(const std::string&)>;

Bundle run(const RunConfig& cfg, const Progress& progress = {});

/// Report JSON. The timestamp is the only field that differs between runs
/// with the same configuration.
nlohmann::ordered_json bundle_json(const Bundle& b, const RunConfig& cfg, const std::string& timestamp);
/// One row per (entry, quantity) plus one per (entry, check).
std::string bundle_csv(const Bundle& b);

enum class Format { Json, Csv };
Format parse_format(const std::string& s);

/// Writes <dir>/<report_name>.json or .csv and returns the path.
std::string write_bundle(const Bundle& b, const RunConfig& cfg, const std::string& dir, Format format);

/// Worker count from GPREGIME_THREADS (default: hardware concurrency, at least 1).
unsigned thread_budget();

/// Runs f(0..n-1) over at most thread_budget() threads; results are stored by
/// index so the output does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace gpregime::pipeline
