#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Sparse>

#include "floqstab/drives.hpp"

namespace floqstab {

using SparseC = Eigen::SparseMatrix<Complex>;

class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(SpaceLayout layout, MatrixC matrix);

  static DensityMatrix pure(const SpaceLayout& layout, const VectorC& psi);
  static DensityMatrix maximally_mixed(const SpaceLayout& layout);

  const SpaceLayout& layout() const { return layout_; }
  const MatrixC& matrix() const { return matrix_; }
  int dim() const { return layout_.total_dim(); }

  Complex trace() const { return matrix_.trace(); }
  double purity() const;
  double min_eigenvalue() const;
  double hermiticity_defect() const;
  Complex expectation(const Operator<>& op) const;
  // reduced state of one factor
  MatrixC reduced(std::size_t factor) const;
  // checks the DensityMatrix invariants at the given tolerances
  bool valid(double herm_tol = 1e-10, double trace_tol = 1e-10, double pos_tol = 1e-8) const;

 private:
  SpaceLayout layout_;
  MatrixC matrix_;
};

double trace_distance(const MatrixC& a, const MatrixC& b);

struct IntegratorConfig {
  enum class Method { RK4 };
  // Dense Hilbert-space frame. Cavity = interaction picture of sum_c Delta_c n_c; results are
  // mapped back to the lab frame. Requires every jump operator to be frame covariant.
  enum class Frame { Lab, Cavity };

  Method method = Method::RK4;
  int steps_per_period = 2000;
  // if > 0 the step count per period is max(100, ceil(T * spread / max_phase_per_step)),
  // spread being a bound on the instantaneous eigenvalue spread of H(t)
  double max_phase_per_step = 0.0;
  int samples_per_period = 200;
  Frame frame = Frame::Lab;

  void check() const;
  int steps_per_period_for(const SystemModel& model) const;
};

// dense generator pieces shared by all propagators
class LindbladGenerator {
 public:
  LindbladGenerator(const SystemModel& model, IntegratorConfig::Frame frame);

  const SystemModel& model() const { return *model_; }
  bool in_cavity_frame() const { return cavity_frame_; }

  // K(t) = -i H(t) - 1/2 sum L^dag L (in the active frame)
  const SparseC& effective(double t);
  const std::vector<SparseC>& jumps() const { return jumps_; }

  // Kx + xK^dag + sum L x L^dag for Hermitian x
  void apply_hermitian(double t, const MatrixC& x, MatrixC& out);
  // general (possibly non-Hermitian) x
  void apply(double t, const MatrixC& x, MatrixC& out);
  // -i H(t) psi, column-wise
  void apply_schrodinger(double t, const MatrixC& psi, MatrixC& out);

  // lab <-> frame conversions at time t
  void to_frame(double t, MatrixC& rho) const;
  void from_frame(double t, MatrixC& rho) const;
  void state_to_frame(double t, MatrixC& psi) const;
  void state_from_frame(double t, MatrixC& psi) const;

 private:
  void refresh(double t, bool hamiltonian_only);

  const SystemModel* model_;
  bool cavity_frame_ = false;
  SparseC pattern_;
  std::vector<Complex> static_values_, damping_values_;
  std::array<std::vector<Complex>, 3> field_values_;
  std::vector<double> frame_freq_;
  std::vector<SparseC> jumps_;
  double cached_t_ = std::numeric_limits<double>::quiet_NaN();
  bool cached_h_only_ = false;
  MatrixC tmp_;
};

// column-stacking vectorized generator, vec(A X B) = (B^T (x) A) vec(X)
class VectorizedLiouvillian {
 public:
  explicit VectorizedLiouvillian(const SystemModel& model);
  const SparseC& at(double t);
  int dim() const { return d_ * d_; }

 private:
  const SystemModel* model_;
  int d_;
  SparseC pattern_;
  std::vector<Complex> static_values_;
  std::array<std::vector<Complex>, 3> field_values_;
  double cached_t_ = std::numeric_limits<double>::quiet_NaN();
};

MatrixC lindblad_rhs(const SystemModel& model, const DensityMatrix& rho, double t);

struct PropagationReport {
  int steps = 0;
  double trace_drift = 0.0;             // |Tr rho - 1| before renormalization
  double hermiticity_correction = 0.0;  // ||rho - (rho + rho^dag)/2||_F
};

// called with lab-frame states on the sample grid (t0 and every 1/samples_per_period period)
using DensityObserver = std::function<void(double t, const MatrixC& rho)>;

DensityMatrix propagate_density(const SystemModel& model, const DensityMatrix& rho0, double t0,
                                double t1, const IntegratorConfig& cfg,
                                const DensityObserver& observer = {},
                                PropagationReport* report = nullptr);

VectorC propagate_state(const SystemModel& model, const VectorC& psi0, double t0, double t1,
                        const IntegratorConfig& cfg);

// time-ordered U(t1, t0) from the identity's columns; dissipators are ignored
using StateObserver = std::function<void(double t, const MatrixC& columns)>;
MatrixC propagate_unitary(const SystemModel& model, double t0, double t1,
                          const IntegratorConfig& cfg, const StateObserver& observer = {});
MatrixC propagate_columns(const SystemModel& model, const MatrixC& psi0, double t0, double t1,
                          const IntegratorConfig& cfg, const StateObserver& observer = {});

// d^2 x d^2 channel over [t0, t1] in the column-stacking basis
MatrixC propagate_superoperator(const SystemModel& model, double t0, double t1,
                                const IntegratorConfig& cfg);

}  // namespace floqstab
