#pragma once

#include <string>
#include <vector>

#include "floqstab/lindblad.hpp"

namespace floqstab {

// Quasienergies folded into [-omega/2, omega/2), ascending. For two-level spectra
// periodic_states() labels "-" as the state of lower period-averaged energy.
struct QuasienergySpectrum {
  double omega_mod = 0.0;
  std::vector<double> quasienergies;
  std::vector<VectorC> modes;  // phi(0), monodromy eigenvectors
  std::string gauge = "largest-magnitude component of phi(0) real and positive";

  // filled by periodic_states: states[level][k] = phi_level(k T / N_t)
  std::vector<double> times;
  std::vector<std::vector<VectorC>> states;
  std::vector<double> mean_energies;
  double periodicity_defect = 0.0;
  int plus = -1, minus = -1;

  double period() const;
  int samples() const { return static_cast<int>(times.size()); }
  bool labelled() const { return plus >= 0 && minus >= 0; }
  double eps_plus() const;
  double eps_minus() const;
  // delta epsilon = eps_+ - eps_-
  double delta_epsilon() const;
  const VectorC& phi_plus(int k) const;
  const VectorC& phi_minus(int k) const;
};

double fold_quasienergy(double eps, double omega_mod);

// one-period propagator of a closed model; dissipators are ignored
MatrixC monodromy(const SystemModel& model, const IntegratorConfig& cfg);
double unitarity_defect(const MatrixC& u);

QuasienergySpectrum quasienergies(const MatrixC& monodromy_op, double period);

QuasienergySpectrum periodic_states(const SystemModel& model, QuasienergySpectrum spectrum,
                                    int samples, const IntegratorConfig& cfg);

// qubit-only spectrum with states, the common entry point for the drive analysis
QuasienergySpectrum qubit_spectrum(const SystemModel& model, int samples,
                                   const IntegratorConfig& cfg);

// (1/T) int dt <phi_+^(m)(t), n| V |phi_-(t), n+1>, V = g (a^dag sigma_- + a sigma_+)
Complex coupling_matrix_element(const SystemModel& full, const QuasienergySpectrum& spectrum,
                                int m, int n, std::size_t cavity = 0);

struct Representative {
  int m;
  double magnitude;
};
// Floquet copy with the largest |H^(m0)_{+-}| over m in [m_min, m_max]
Representative strongest_representative(const SystemModel& full,
                                        const QuasienergySpectrum& spectrum, int m_min,
                                        int m_max, int n = 0, std::size_t cavity = 0);

// first-order hybridized state (|phi_+^(m), n> +- e^{-i arg H}|phi_-, n+1>)/sqrt2 at t = 0
VectorC hybridized_state(const SystemModel& full, const QuasienergySpectrum& spectrum, int m,
                         int n, int sign, std::size_t cavity = 0);

// phi (x) |n> on `cavity`, every other cavity in vacuum
VectorC product_state(const SpaceLayout& layout, const VectorC& qubit, std::size_t cavity, int n);

struct ResonanceCondition {
  int m;
  int n_ph;
  double offset;  // n_ph Delta - m omega - delta_eps
};

std::vector<ResonanceCondition> resonance_map(double detuning, double omega_mod,
                                              double delta_eps, int m_min, int m_max,
                                              int nph_min = 1, int nph_max = 1);
// Delta on the (m, n_ph) line
double resonance_detuning(int m, int n_ph, double omega_mod, double delta_eps);
// adiabatic limit: delta = Delta - B0
inline double adiabatic_detuning(double detuning, double B0) { return detuning - B0; }

}  // namespace floqstab
