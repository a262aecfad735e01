#include <cmath>

#include <Eigen/Eigenvalues>

#include "floqstab/experiments.hpp"
#include "floqstab/parallel.hpp"

namespace floqstab {

VectorC instantaneous_state(const Field& b, int sign) {
  const auto q = qubit_ops<>();
  const MatrixC h = 0.5 * (b(0) * q.sx.matrix() + b(1) * q.sy.matrix() + b(2) * q.sz.matrix());
  Eigen::SelfAdjointEigenSolver<MatrixC> es(h);
  VectorC v = es.eigenvectors().col(sign < 0 ? 0 : 1);
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  return v * (std::abs(v(k)) / v(k));
}

double instantaneous_p_minus(const MatrixC& qubit_rho, const Field& b) {
  const VectorC v = instantaneous_state(b, -1);
  return (v.adjoint() * qubit_rho * v)(0).real();
}

namespace {

SystemModel adiabatic_model(const AdiabaticParams& p, double delta) {
  Cavity c{p.B0 + delta, p.coupling, p.kappa, p.truncation};
  return SystemModel(DriveProtocol::circular(p.B0, p.omega_mod), {c},
                     {p.relaxation, p.dephasing});
}

DecayCurve decay_curve(const SystemModel& model, const AdiabaticParams& p, int sign,
                       IntegratorConfig cfg) {
  cfg.samples_per_period = p.samples_per_period;
  const Field b0 = model.drive().field(0.0);
  const VectorC psi = product_state(model.layout(), instantaneous_state(b0, sign), 0, 0);
  DecayCurve c;
  propagate_density(model, DensityMatrix::pure(model.layout(), psi), 0.0, p.periods * model.period(),
                    cfg, [&](double t, const MatrixC& rho) {
                      const MatrixC q = DensityMatrix(model.layout(), rho).reduced(0);
                      c.t.push_back(t);
                      c.p_minus.push_back(instantaneous_p_minus(q, model.drive().field(t)));
                    });
  // period averages over the samples after t = 0
  const int n = p.samples_per_period;
  for (int k = 0; k < p.periods; ++k) {
    double s = 0.0;
    for (int j = 1; j <= n; ++j) s += c.p_minus.at(k * n + j);
    c.t_period.push_back((k + 0.5) * model.period());
    c.p_period.push_back(s / n);
  }
  return c;
}

}  // namespace

std::vector<AdiabaticPoint> adiabatic_experiment(const AdiabaticParams& p,
                                                 const std::vector<double>& deltas,
                                                 const IntegratorConfig& cfg,
                                                 const ScanOptions& opts) {
  if (p.periods < 5) throw ParameterError("adiabatic runs need at least 5 periods to fit");
  if (p.samples_per_period < 1) throw ParameterError("samples_per_period must be >= 1");
  std::vector<AdiabaticPoint> out(deltas.size());
  parallel_for(static_cast<int>(deltas.size()), opts.threads, [&](int i) {
    const SystemModel model = adiabatic_model(p, deltas[i]);
    IntegratorConfig hilbert = cfg;
    hilbert.frame = IntegratorConfig::Frame::Cavity;
    AdiabaticPoint& r = out[i];
    r.delta = deltas[i];
    r.from_plus = decay_curve(model, p, +1, hilbert);
    r.from_minus = decay_curve(model, p, -1, hilbert);
    try {
      r.fit = fit_exponential(r.from_plus.t_period, r.from_plus.p_period);
      r.stabilization_time = r.fit->get("T");
      r.steady_p_minus = r.fit->get("C");
    } catch (const FitError& e) {
      r.fit_error = e.what();
      if (!opts.keep_going) throw;
    }
    if (p.spectral) {
      IntegratorConfig lab = cfg;
      lab.frame = IntegratorConfig::Frame::Lab;
      const auto s = build_superoperator(model, lab);
      r.spectral_time = steady_state(s, model, lab, 16).stabilization_time;
    }
  });
  return out;
}

}  // namespace floqstab
