#include "floqstab/steadystate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace floqstab {

VectorC vectorize(const MatrixC& rho) {
  return Eigen::Map<const VectorC>(rho.data(), rho.size());
}

MatrixC devectorize(const VectorC& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d) throw DimensionError("vector is not d^2 long");
  return Eigen::Map<const MatrixC>(v.data(), d, d);
}

double FloquetSuperoperator::trace_preservation_defect() const {
  const VectorC id = vectorize(MatrixC::Identity(dim, dim));
  return (id.adjoint() * matrix - id.adjoint()).norm();
}

double FloquetSuperoperator::spectral_radius() const {
  Eigen::ComplexEigenSolver<MatrixC> es(matrix, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

FloquetSuperoperator build_superoperator(const SystemModel& model, const IntegratorConfig& cfg) {
  return {model.dim(), model.period(), propagate_superoperator(model, 0.0, model.period(), cfg)};
}

MatrixC choi_matrix(const FloquetSuperoperator& s) {
  const int d = s.dim;
  MatrixC choi = MatrixC::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      choi.block(i * d, j * d, d, d) = devectorize(s.matrix.col(i + j * d), d);
  return choi;
}

SteadyStateResult steady_state(const FloquetSuperoperator& s, const SystemModel& model,
                               const IntegratorConfig& cfg, int samples) {
  if (s.dim != model.dim()) throw DimensionError("superoperator does not match the model");
  if (samples < 2) throw ParameterError("need at least two samples per period");
  const int d = s.dim;
  Eigen::ComplexEigenSolver<MatrixC> es(s.matrix);
  const auto& lambda = es.eigenvalues();

  std::vector<int> order(lambda.size());
  for (int i = 0; i < static_cast<int>(order.size()); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(lambda(a)) > std::abs(lambda(b)); });

  SteadyStateResult r;
  int ss = 0;
  for (int i = 0; i < lambda.size(); ++i)
    if (std::abs(lambda(i) - 1.0) < std::abs(lambda(ss) - 1.0)) ss = i;
  r.steady_eigenvalue_defect = std::abs(lambda(ss) - 1.0);
  if (r.steady_eigenvalue_defect > 1e-4)
    throw AccuracyError("no superoperator eigenvalue within 1e-4 of 1 (closest off by " +
                        std::to_string(r.steady_eigenvalue_defect) + ")");

  for (int i : order) {
    r.eigenvalues.push_back(lambda(i));
    if (std::abs(std::abs(lambda(i)) - 1.0) < 1e-6) ++r.unit_modulus_count;
  }
  r.degenerate = r.unit_modulus_count > 1;

  double second = 0.0;
  for (int i : order)
    if (i != ss) {
      second = std::abs(lambda(i));
      break;
    }
  r.stabilization_rate = second > 0.0 ? std::max(0.0, -std::log(second) / s.period)
                                      : std::numeric_limits<double>::infinity();
  r.stabilization_time = 1.0 / r.stabilization_rate;

  MatrixC rho = devectorize(es.eigenvectors().col(ss), d);
  rho /= rho.trace();
  r.hermiticity_defect = (rho - rho.adjoint()).norm();
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();

  IntegratorConfig c = cfg;
  c.samples_per_period = samples;
  const DensityMatrix rho0(model.layout(), rho);
  int k = 0;
  const DensityMatrix end =
      propagate_density(model, rho0, 0.0, s.period, c, [&](double, const MatrixC& x) {
        if (k++ == samples) return;
        r.times.push_back((k - 1) * s.period / samples);
        r.states.emplace_back(model.layout(), 0.5 * (x + x.adjoint()));
      });
  r.periodicity_defect = trace_distance(end.matrix(), rho);
  return r;
}

double fidelity(const SteadyStateResult& r, const QuasienergySpectrum& target) {
  if (!target.labelled()) throw ParameterError("target spectrum has no periodic states");
  if (r.samples() != target.samples() || r.samples() == 0)
    throw DimensionError("steady state and target use different time grids (" +
                         std::to_string(r.samples()) + " vs " +
                         std::to_string(target.samples()) + " samples)");
  const double period = target.period();
  if (std::abs(r.times.back() - target.times.back()) > 1e-9 * period)
    throw DimensionError("steady state and target sample different periods");

  double sum = 0.0;
  for (int k = 0; k < r.samples(); ++k) {
    const DensityMatrix& rho = r.states[k];
    const VectorC& phi = target.phi_minus(k);
    if (rho.layout().factor_dim(0) != 2) throw DimensionError("factor 0 must be the qubit");
    // Tr[rho (P (x) 1)] = <phi| Tr_cavities(rho) |phi>
    const MatrixC q = rho.reduced(0);
    sum += (phi.adjoint() * q * phi)(0).real();
  }
  return sum / r.samples();
}

}  // namespace floqstab
