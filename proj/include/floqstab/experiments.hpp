#pragma once

#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "floqstab/fit.hpp"
#include "floqstab/steadystate.hpp"

namespace floqstab {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------- circular-drive points

// Single-cavity circular-drive model; every frequency in the same (angular) unit.
struct PointParams {
  double B0 = 1.0;
  double omega_mod = 1.0;
  double detuning = 1.0;
  double coupling = 0.05;
  double kappa = 0.05;
  double relaxation = 0.0025;
  double dephasing = 0.0;
  int truncation = 4;
};

SystemModel circular_model(const PointParams& p);
// by name: B0, omega_mod, detuning, coupling, kappa, relaxation, dephasing
void set_parameter(PointParams& p, const std::string& name, double value);
bool is_parameter(const std::string& name);

struct AnalysisConfig {
  IntegratorConfig integrator;
  int samples = 256;  // N_t for periodic states and rho_SS(t)
};

struct PointAnalysis {
  QuasienergySpectrum spectrum;
  FloquetSuperoperator superoperator;
  SteadyStateResult steady;
  double fidelity = nan_value;
};

PointAnalysis analyze_point(const PointParams& p, const AnalysisConfig& cfg);

struct PointResult {
  double x = nan_value, y = nan_value;  // scan coordinates
  double fidelity = nan_value;
  double stabilization_time = nan_value;
  double delta_epsilon = nan_value;
  std::string error;
  bool ok() const { return error.empty(); }
};

// never throws for numerical failures; they land in PointResult::error
PointResult evaluate_point(const PointParams& p, const AnalysisConfig& cfg);

// delta epsilon of the qubit-only circular drive
double circular_delta_epsilon(double B0, double omega_mod, const IntegratorConfig& cfg);

// ---------------------------------------------------------------- scans

struct ScanAxis {
  std::string parameter;
  double min = 0.0, max = 1.0;
  int count = 2;
  bool log = false;
  std::vector<double> values() const;
};

struct ScanGrid {
  ScanAxis x{"omega_mod", 0.25, 5.0, 40, true};
  ScanAxis y{"detuning", 0.1, 3.6, 40, false};
  PointParams base;
  AnalysisConfig analysis;

  void check() const;
  PointParams point(int ix, int iy) const;
  // stable textual identity used to validate checkpoints
  std::string fingerprint() const;
};

struct ScanOptions {
  int threads = 0;  // 0 = hardware concurrency
  bool keep_going = true;
  std::string checkpoint;  // per-row checkpoint file, empty = none
  std::function<void(int done, int total)> progress;
};

struct ScanTable {
  ScanGrid grid;
  std::vector<PointResult> points;  // index iy * nx + ix

  const PointResult& at(int ix, int iy) const;
  int failures() const;
};

ScanTable scan_fidelity(const ScanGrid& grid, const ScanOptions& opts = {});

struct ResonanceLine {
  int m, n_ph;
  std::vector<double> omega, detuning;
};
// (m, n_ph) lines across the omega values of a scan
std::vector<ResonanceLine> resonance_lines(const std::vector<double>& omegas, double B0,
                                           int m_min, int m_max, int nph_max,
                                           const IntegratorConfig& cfg);

struct TruncationCheck {
  struct Entry {
    int ix, iy;
    double fidelity, fidelity_larger;
  };
  std::vector<Entry> entries;
  int extra = 2;
  double max_change() const;
};
// re-evaluates `count` deterministic pseudo-random points at truncation + extra
TruncationCheck truncation_convergence(const ScanTable& table, int count = 5, int extra = 2,
                                       const ScanOptions& opts = {});

// ---------------------------------------------------------------- line cuts

struct ResonancePeak {
  Peak peak;
  int m = 0, n_ph = 1;
  double line = nan_value;  // Delta of the nearest resonance line
  std::optional<FitResult> lorentzian;
};

struct LinecutResult {
  PointParams base;
  double delta_epsilon = nan_value;
  std::vector<PointResult> points;  // x = Delta
  std::vector<ResonancePeak> peaks;
};

// uniform steps plus dense windows of half-width `window` around the given centers
std::vector<double> refined_grid(double min, double max, double step,
                                 const std::vector<double>& centers, double window,
                                 double fine_step);

LinecutResult detuning_linecut(const PointParams& base, const std::vector<double>& detunings,
                               const AnalysisConfig& cfg, const ScanOptions& opts = {},
                               double min_prominence = 0.02, int m_max = 4, int nph_max = 2);

// ---------------------------------------------------------------- adiabatic emulation

// Defaults are the experimental values in rad/us and us.
struct AdiabaticParams {
  double B0 = two_pi * 80.0;
  double omega_mod = two_pi * 0.75;
  double coupling = two_pi * 13.0;
  double kappa = two_pi * 0.084;
  double relaxation = two_pi * 0.0138;
  double dephasing = 1.0 / 10.2;  // 1 / T_d
  int truncation = 3;
  int periods = 16;
  int samples_per_period = 16;
  bool spectral = false;  // also compute the spectral stabilization time
};

struct DecayCurve {
  std::vector<double> t, p_minus;          // raw samples
  std::vector<double> t_period, p_period;  // one average per period, at its midpoint
};

struct AdiabaticPoint {
  double delta = nan_value;  // Delta - B0
  DecayCurve from_plus, from_minus;
  std::optional<FitResult> fit;  // exponential fit to the phi_+ period averages
  std::string fit_error;
  double stabilization_time = nan_value;
  double steady_p_minus = nan_value;
  double spectral_time = nan_value;
};

std::vector<AdiabaticPoint> adiabatic_experiment(const AdiabaticParams& p,
                                                 const std::vector<double>& deltas,
                                                 const IntegratorConfig& cfg,
                                                 const ScanOptions& opts = {});

// P(phi_-) with phi_- the lower instantaneous eigenstate of 1/2 sigma.B(t)
double instantaneous_p_minus(const MatrixC& qubit_rho, const Field& b);
VectorC instantaneous_state(const Field& b, int sign);

// ---------------------------------------------------------------- elliptical drives

struct EllipticalParams {
  double bx = two_pi * 100.0;
  double bz = two_pi * 60.0;
  double detuning = two_pi * 90.0;
  double omega_mod = two_pi * 0.75;
  double coupling = two_pi * 13.0;
  double kappa = two_pi * 0.084;
  double relaxation = two_pi * 0.0138;
  double dephasing = 1.0 / 10.2;
  int truncation = 3;
  double duration = 0.0;  // 0 = 5 cavity lifetimes
  int samples_per_period = 16;
};

struct EllipticalTrajectory {
  std::vector<double> t, sigma_z, p_minus;
  std::vector<MatrixC> qubit;  // reduced qubit states
};

struct EllipticalResult {
  EllipticalTrajectory from_plus, from_minus;
  std::vector<double> distance;  // qubit trace distance between the two runs
  double converged_at = nan_value;  // first time after which distance stays below tolerance
  double tolerance = 0.05;
  bool converged() const { return converged_at == converged_at; }
};

EllipticalResult elliptical_run(const EllipticalParams& p, const IntegratorConfig& cfg,
                                double tolerance = 0.05);

// ---------------------------------------------------------------- boosting

// Defaults: reference boosting parameters in units of g_b.
struct BoostParams {
  double g_b = 1.0;
  double B0 = 20.0;
  double omega_mod = 1.5;
  double delta_b = 1.5 * std::numbers::phi;
  double delta_s = 20.0;
  double g_s = 1.0;
  double kappa_s = 1.0;
  int nb_max = 45;
  int ns_max = 3;
  int nb0 = 10;
  int periods = 12;
  int samples_per_period = 8;
};

SystemModel boost_model(const BoostParams& p);

struct BoostResult {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> distribution;  // P(n_b, t)
  std::vector<double> mean, stddev;
  struct Rephasing {
    int M, N;
    double mismatch;  // |M T - N 2 pi / Delta_b|
  };
  std::vector<Rephasing> rephasing;
  double pump_rate = nan_value;  // <dn_b/dt> T_mod averaged over the run
  double boundary_occupation = 0.0;
  int mode_at_end = -1;
};

BoostResult boost_run(const BoostParams& p, const IntegratorConfig& cfg);

// P(n) of one factor from the diagonal of rho
Eigen::VectorXd occupation(const MatrixC& rho, const SpaceLayout& layout, std::size_t factor);

}  // namespace floqstab
