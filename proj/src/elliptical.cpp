#include <cmath>

#include "floqstab/experiments.hpp"

namespace floqstab {

namespace {

EllipticalTrajectory trajectory(const SystemModel& model, int sign, double duration,
                                const IntegratorConfig& cfg) {
  const VectorC psi =
      product_state(model.layout(), instantaneous_state(model.drive().field(0.0), sign), 0, 0);
  const auto q = qubit_ops<>();
  EllipticalTrajectory tr;
  propagate_density(model, DensityMatrix::pure(model.layout(), psi), 0.0, duration, cfg,
                    [&](double t, const MatrixC& rho) {
                      MatrixC r = DensityMatrix(model.layout(), rho).reduced(0);
                      tr.t.push_back(t);
                      tr.sigma_z.push_back((r * q.sz.matrix()).trace().real());
                      tr.p_minus.push_back(instantaneous_p_minus(r, model.drive().field(t)));
                      tr.qubit.push_back(std::move(r));
                    });
  return tr;
}

}  // namespace

EllipticalResult elliptical_run(const EllipticalParams& p, const IntegratorConfig& cfg,
                                double tolerance) {
  if (!(p.kappa > 0.0) && !(p.duration > 0.0))
    throw ParameterError("duration is required when kappa = 0");
  Cavity c{p.detuning, p.coupling, p.kappa, p.truncation};
  const SystemModel model(DriveProtocol::elliptical(p.bx, p.bz, p.omega_mod), {c},
                          {p.relaxation, p.dephasing});
  const double duration = p.duration > 0.0 ? p.duration : 5.0 / p.kappa;

  IntegratorConfig run = cfg;
  run.frame = IntegratorConfig::Frame::Cavity;
  run.samples_per_period = p.samples_per_period;

  EllipticalResult r;
  r.tolerance = tolerance;
  r.from_plus = trajectory(model, +1, duration, run);
  r.from_minus = trajectory(model, -1, duration, run);
  const std::size_t n = std::min(r.from_plus.t.size(), r.from_minus.t.size());
  for (std::size_t k = 0; k < n; ++k)
    r.distance.push_back(trace_distance(r.from_plus.qubit[k], r.from_minus.qubit[k]));
  // earliest sample from which the distance stays below tolerance
  for (std::size_t k = n; k-- > 0;) {
    if (!(r.distance[k] < tolerance)) break;
    r.converged_at = r.from_plus.t[k];
  }
  return r;
}

}  // namespace floqstab
