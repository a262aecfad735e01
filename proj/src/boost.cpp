#include <cmath>
#include <sstream>

#include "floqstab/experiments.hpp"

namespace floqstab {

Eigen::VectorXd occupation(const MatrixC& rho, const SpaceLayout& layout, std::size_t factor) {
  if (rho.rows() != layout.total_dim()) throw DimensionError("state does not match the layout");
  if (factor >= layout.size()) throw DimensionError("factor index out of range");
  int inner = 1;
  for (std::size_t f = factor + 1; f < layout.size(); ++f) inner *= layout.factor_dim(f);
  const int n = layout.factor_dim(factor);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < rho.rows(); ++i) p((i / inner) % n) += rho(i, i).real();
  return p;
}

// Qubit, boost cavity b, stabilizer cavity s. Without stabilizer coupling the s mode stays in
// vacuum exactly, so it is omitted.
SystemModel boost_model(const BoostParams& p) {
  if (p.nb_max < 1 || p.ns_max < 1) throw ParameterError("cavity truncations must be >= 1");
  std::vector<Cavity> cav{{p.delta_b, p.g_b, 0.0, p.nb_max}};
  if (p.g_s != 0.0) cav.push_back({p.delta_s, p.g_s, p.kappa_s, p.ns_max});
  return SystemModel(DriveProtocol::semicircle(p.B0, p.omega_mod), cav);
}

BoostResult boost_run(const BoostParams& p, const IntegratorConfig& cfg) {
  if (p.periods < 1) throw ParameterError("boost needs at least one period");
  if (p.nb0 < 0 || p.nb0 > p.nb_max) throw ParameterError("initial n_b outside the truncation");
  const SystemModel model = boost_model(p);
  const SpaceLayout& layout = model.layout();
  const bool stabilized = layout.size() == 3;

  std::vector<int> levels(layout.size(), 0);
  levels[1] = p.nb0;
  const VectorC psi = basis_state(layout, levels);

  IntegratorConfig run = cfg;
  run.frame = IntegratorConfig::Frame::Cavity;
  run.samples_per_period = p.samples_per_period;

  BoostResult r;
  double boundary_s = 0.0;
  const Eigen::VectorXd n = Eigen::VectorXd::LinSpaced(p.nb_max + 1, 0, p.nb_max);
  propagate_density(model, DensityMatrix::pure(layout, psi), 0.0, p.periods * model.period(), run,
                    [&](double t, const MatrixC& rho) {
                      const Eigen::VectorXd pb = occupation(rho, layout, 1);
                      const double mean = pb.dot(n);
                      const double var = pb.dot(n.cwiseProduct(n)) - mean * mean;
                      r.times.push_back(t);
                      r.distribution.push_back(pb);
                      r.mean.push_back(mean);
                      r.stddev.push_back(std::sqrt(std::max(0.0, var)));
                      r.boundary_occupation = std::max(r.boundary_occupation, pb(p.nb_max));
                      if (stabilized)
                        boundary_s = std::max(boundary_s, occupation(rho, layout, 2)(p.ns_max));
                    });
  if (r.boundary_occupation > 1e-4 || boundary_s > 1e-4) {
    std::ostringstream s;
    s << "occupation " << std::max(r.boundary_occupation, boundary_s)
      << " at the truncation boundary of the " << (boundary_s > 1e-4 ? "stabilizer" : "boost")
      << " cavity exceeds 1e-4; increase " << (boundary_s > 1e-4 ? "ns_max" : "nb_max");
    throw TruncationError(s.str());
  }

  const double T = model.period();
  for (int M = 1; M <= p.periods; ++M) {
    const int N = static_cast<int>(std::lround(M * T * p.delta_b / two_pi));
    r.rephasing.push_back({M, N, std::abs(M * T - N * two_pi / p.delta_b)});
  }
  r.pump_rate = (r.mean.back() - r.mean.front()) / p.periods;
  r.distribution.back().maxCoeff(&r.mode_at_end);
  return r;
}

}  // namespace floqstab
