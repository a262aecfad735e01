#pragma once

#include <string>
#include <vector>

#include "floqstab/floquet.hpp"

namespace floqstab {

// One-period channel on column-stacked density matrices, built from matrix-unit inputs:
// column (i + j d) is vec(Phi(|i><j|)).
struct FloquetSuperoperator {
  int dim = 0;  // Hilbert-space dimension d
  double period = 0.0;
  MatrixC matrix;
  std::string vectorization = "column-stacking, computational matrix units";

  // ||vec(1)^dag S - vec(1)^dag||
  double trace_preservation_defect() const;
  double spectral_radius() const;
  VectorC apply(const VectorC& vec_rho) const { return matrix * vec_rho; }
};

FloquetSuperoperator build_superoperator(const SystemModel& model, const IntegratorConfig& cfg);

// Choi matrix sum_ij |i><j| (x) Phi(|i><j|)
MatrixC choi_matrix(const FloquetSuperoperator& s);

VectorC vectorize(const MatrixC& rho);
MatrixC devectorize(const VectorC& v, int d);

struct SteadyStateResult {
  std::vector<double> times;             // k T / N_t
  std::vector<DensityMatrix> states;     // rho_SS(t_k)
  std::vector<Complex> eigenvalues;      // superoperator spectrum, |lambda| descending
  double steady_eigenvalue_defect = 0.0; // |lambda_ss - 1|
  double hermiticity_defect = 0.0;       // of the raw normalized eigenvector
  double periodicity_defect = 0.0;       // trace distance rho(T) vs rho(0)
  double stabilization_rate = 0.0;       // -ln|lambda_2| / T
  double stabilization_time = 0.0;
  int unit_modulus_count = 0;            // eigenvalues within 1e-6 of |lambda| = 1
  bool degenerate = false;

  int samples() const { return static_cast<int>(times.size()); }
};

SteadyStateResult steady_state(const FloquetSuperoperator& s, const SystemModel& model,
                               const IntegratorConfig& cfg, int samples = 256);

// (1/T) int dt Tr[rho_SS(t) (|phi_-(t)><phi_-(t)| (x) 1)]
double fidelity(const SteadyStateResult& result, const QuasienergySpectrum& target);

}  // namespace floqstab
