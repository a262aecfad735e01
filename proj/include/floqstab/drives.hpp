#pragma once

#include <array>
#include <numbers>
#include <string>
#include <vector>

#include "floqstab/algebra.hpp"

namespace floqstab {

using Field = Eigen::Vector3d;

// Effective field B(t) seen by the qubit. All frequencies are angular.
class DriveProtocol {
 public:
  enum class Kind { Circular, Semicircle, Elliptical, Static };

  static DriveProtocol circular(double B0, double omega_mod);
  // B_x = B0 max(0, sin), B_z = B0 cos: |g> is the lower state at t = 0
  static DriveProtocol semicircle(double B0, double omega_mod);
  static DriveProtocol elliptical(double bx_amp, double bz_amp, double omega_mod);
  // time independent field; omega_mod only fixes the analysis period
  static DriveProtocol constant(const Field& field, double omega_mod);

  Kind kind() const { return kind_; }
  double B0() const { return b0_; }
  double bx_amp() const { return bx_; }
  double bz_amp() const { return bz_; }
  double omega_mod() const { return omega_; }
  double period() const { return 2.0 * std::numbers::pi / omega_; }

  Field field(double t) const;
  // max_t |B(t)|, used for step-size bounds
  double max_field() const;

 private:
  DriveProtocol(Kind kind, double b0, double bx, double bz, double omega);

  Kind kind_;
  double b0_, bx_, bz_, omega_;
  Field static_{0, 0, 0};
};

std::string to_string(DriveProtocol::Kind kind);

struct Cavity {
  double detuning = 0.0;   // Delta
  double coupling = 0.0;   // g
  double loss_rate = 0.0;  // kappa
  int truncation = 4;      // n_max
};

struct QubitRates {
  double relaxation = 0.0;  // Gamma, jump sqrt(Gamma) sigma_-
  double dephasing = 0.0;   // gamma_phi, jump sqrt(gamma_phi/2) sigma_z
};

struct Dissipator {
  Operator<> op;  // unscaled
  double rate;
  std::string label;
};

// Qubit on factor 0, cavities on factors 1..n in the order given.
// H(t) = 1/2 sigma.B(t) + sum_c [Delta_c n_c + g_c (a_c^dag sigma_- + a_c sigma_+)]
class SystemModel {
 public:
  SystemModel(DriveProtocol drive, std::vector<Cavity> cavities = {}, QubitRates rates = {});

  const SpaceLayout& layout() const { return layout_; }
  const DriveProtocol& drive() const { return drive_; }
  const std::vector<Cavity>& cavities() const { return cavities_; }
  const QubitRates& rates() const { return rates_; }
  int dim() const { return layout_.total_dim(); }
  double period() const { return drive_.period(); }

  // time-independent part and the three 1/2 sigma_a couplings to B_a(t)
  const MatrixC& static_part() const { return h_static_; }
  const std::array<MatrixC, 3>& field_terms() const { return field_terms_; }
  // diagonal of sum_c Delta_c n_c
  const Eigen::VectorXd& cavity_frame() const { return frame_; }

  Operator<> hamiltonian(double t) const;
  std::vector<Dissipator> dissipators() const;
  bool dissipative() const;

  // bound on the spread of instantaneous eigenvalues of H(t)
  double spectral_spread(bool include_cavity_frame = true) const;

  SystemModel closed() const;
  SystemModel qubit_only() const;
  SystemModel with_drive(DriveProtocol drive) const;

  // hierarchy Gamma < kappa <~ g << Delta; returns human readable warnings
  std::vector<std::string> validate() const;

 private:
  DriveProtocol drive_;
  std::vector<Cavity> cavities_;
  QubitRates rates_;
  SpaceLayout layout_;
  MatrixC h_static_;
  std::array<MatrixC, 3> field_terms_;
  Eigen::VectorXd frame_;
};

Operator<> hamiltonian(const SystemModel& model, double t);
// embedded and pre-scaled by sqrt(rate); zero-rate channels are skipped
std::vector<Operator<>> jump_operators(const SystemModel& model);

}  // namespace floqstab
