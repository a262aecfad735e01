#include "floqstab/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace floqstab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void fix_gauge(VectorC& v) {
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  v *= std::polar(1.0, -std::arg(v(k)));
  v /= v.norm();
}

void require_labelled(const QuasienergySpectrum& s) {
  if (!s.labelled()) throw ParameterError("spectrum has no +/- labelling; run periodic_states");
}

}  // namespace

double QuasienergySpectrum::period() const { return two_pi / omega_mod; }

double QuasienergySpectrum::eps_plus() const {
  require_labelled(*this);
  return quasienergies[plus];
}

double QuasienergySpectrum::eps_minus() const {
  require_labelled(*this);
  return quasienergies[minus];
}

double QuasienergySpectrum::delta_epsilon() const { return eps_plus() - eps_minus(); }

const VectorC& QuasienergySpectrum::phi_plus(int k) const {
  require_labelled(*this);
  return states.at(plus).at(k);
}

const VectorC& QuasienergySpectrum::phi_minus(int k) const {
  require_labelled(*this);
  return states.at(minus).at(k);
}

double fold_quasienergy(double eps, double omega_mod) {
  double f = eps - omega_mod * std::floor(eps / omega_mod + 0.5);
  if (f >= 0.5 * omega_mod) f -= omega_mod;
  if (f < -0.5 * omega_mod) f += omega_mod;
  return f;
}

double unitarity_defect(const MatrixC& u) {
  return (u.adjoint() * u - MatrixC::Identity(u.cols(), u.cols())).norm();
}

MatrixC monodromy(const SystemModel& model, const IntegratorConfig& cfg) {
  MatrixC u = propagate_unitary(model, 0.0, model.period(), cfg);
  const double defect = unitarity_defect(u);
  if (defect > 1e-6)
    throw AccuracyError("monodromy unitarity defect " + std::to_string(defect) +
                        "; increase steps_per_period");
  return u;
}

QuasienergySpectrum quasienergies(const MatrixC& u, double period) {
  if (u.rows() != u.cols()) throw DimensionError("monodromy must be square");
  if (!(period > 0.0)) throw ParameterError("period must be positive");
  if (unitarity_defect(u) > 1e-6) throw ParameterError("monodromy operator is not unitary");
  Eigen::ComplexEigenSolver<MatrixC> es(u);
  const double omega = two_pi / period;

  std::vector<int> order(u.rows());
  std::vector<double> eps(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    eps[i] = fold_quasienergy(-std::arg(es.eigenvalues()(i)) / period, omega);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eps[a] < eps[b]; });

  QuasienergySpectrum s;
  s.omega_mod = omega;
  for (int i : order) {
    s.quasienergies.push_back(eps[i]);
    VectorC v = es.eigenvectors().col(i);
    fix_gauge(v);
    s.modes.push_back(std::move(v));
  }
  return s;
}

QuasienergySpectrum periodic_states(const SystemModel& model, QuasienergySpectrum s, int samples,
                                    const IntegratorConfig& cfg) {
  if (samples < 2) throw ParameterError("need at least two samples per period");
  const std::size_t levels = s.modes.size();
  if (levels == 0 || s.modes[0].size() != model.dim())
    throw DimensionError("spectrum does not match the model");
  const double period = model.period();
  if (std::abs(s.period() - period) > 1e-12 * period)
    throw ParameterError("spectrum and model have different periods");

  for (std::size_t i = 0; i < levels; ++i)
    for (std::size_t j = i + 1; j < levels; ++j) {
      const Complex li = std::polar(1.0, -s.quasienergies[i] * period);
      const Complex lj = std::polar(1.0, -s.quasienergies[j] * period);
      if (std::abs(li - lj) < 1e-8)
        throw ParameterError("degenerate monodromy spectrum (levels " + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
    }

  MatrixC phi0(model.dim(), static_cast<Eigen::Index>(levels));
  for (std::size_t l = 0; l < levels; ++l) phi0.col(l) = s.modes[l];

  IntegratorConfig c = cfg;
  c.samples_per_period = samples;
  s.times.clear();
  s.states.assign(levels, {});
  s.mean_energies.assign(levels, 0.0);
  MatrixC at_period;
  int k = 0;
  propagate_columns(model, phi0, 0.0, period, c, [&](double t, const MatrixC& psi) {
    if (k == samples) {
      at_period = psi;
      return;
    }
    const double tk = k * period / samples;
    s.times.push_back(tk);
    const MatrixC h = model.hamiltonian(tk).matrix();
    for (std::size_t l = 0; l < levels; ++l) {
      VectorC phi = psi.col(l) * std::polar(1.0, s.quasienergies[l] * t);
      s.mean_energies[l] += (phi.adjoint() * h * phi)(0).real() / samples;
      s.states[l].push_back(std::move(phi));
    }
    ++k;
  });

  s.periodicity_defect = 0.0;
  for (std::size_t l = 0; l < levels; ++l) {
    const VectorC end = at_period.col(l) * std::polar(1.0, s.quasienergies[l] * period);
    s.periodicity_defect = std::max(s.periodicity_defect, (end - s.states[l][0]).norm());
  }

  s.plus = s.minus = -1;
  if (levels == 2) {
    s.minus = s.mean_energies[0] <= s.mean_energies[1] ? 0 : 1;
    s.plus = 1 - s.minus;
  }
  return s;
}

QuasienergySpectrum qubit_spectrum(const SystemModel& model, int samples,
                                   const IntegratorConfig& cfg) {
  const SystemModel q = model.closed().qubit_only();
  return periodic_states(q, quasienergies(monodromy(q, cfg), q.period()), samples, cfg);
}

VectorC product_state(const SpaceLayout& layout, const VectorC& qubit, std::size_t cavity, int n) {
  if (layout.size() < 2 || cavity + 1 >= layout.size())
    throw DimensionError("layout has no cavity " + std::to_string(cavity));
  if (qubit.size() != 2) throw DimensionError("qubit state must have two components");
  std::vector<int> levels(layout.size(), 0);
  levels[cavity + 1] = n;
  VectorC out = VectorC::Zero(layout.total_dim());
  for (int q = 0; q < 2; ++q) {
    levels[0] = q;
    out(layout.index(levels)) = qubit(q);
  }
  return out;
}

Complex coupling_matrix_element(const SystemModel& full, const QuasienergySpectrum& s, int m,
                                int n, std::size_t cavity) {
  require_labelled(s);
  if (s.samples() < 64) throw ParameterError("matrix element needs at least 64 samples per period");
  if (s.modes[0].size() != 2) throw DimensionError("matrix element needs a qubit-only spectrum");
  if (cavity >= full.cavities().size()) throw DimensionError("cavity index out of range");
  const auto& cav = full.cavities()[cavity];
  if (n < 0 || n + 1 > cav.truncation)
    throw ParameterError("photon sector n+1 exceeds the cavity truncation");

  const SpaceLayout& layout = full.layout();
  const Operator<> a = embed(boson_ops(cav.truncation).a, cavity + 1, layout);
  const Operator<> sm = embed(qubit_ops().sm, 0, layout);
  const MatrixC jc = a.matrix().adjoint() * sm.matrix();
  const MatrixC v = cav.coupling * (jc + jc.adjoint());

  Complex sum = 0.0;
  const int samples = s.samples();
  for (int k = 0; k < samples; ++k) {
    const VectorC bra = product_state(layout, s.phi_plus(k), cavity, n);
    const VectorC ket = product_state(layout, s.phi_minus(k), cavity, n + 1);
    // <phi_+^(m)| = e^{-i m omega t} <phi_+|
    sum += std::polar(1.0, -m * s.omega_mod * s.times[k]) * bra.dot(v * ket);
  }
  // periodic trapezoid rule on the uniform grid
  return sum / static_cast<double>(samples);
}

Representative strongest_representative(const SystemModel& full, const QuasienergySpectrum& s,
                                        int m_min, int m_max, int n, std::size_t cavity) {
  if (m_max < m_min) throw ParameterError("empty Floquet index range");
  Representative best{m_min, -1.0};
  for (int m = m_min; m <= m_max; ++m) {
    const double mag = std::abs(coupling_matrix_element(full, s, m, n, cavity));
    if (mag > best.magnitude) best = {m, mag};
  }
  return best;
}

VectorC hybridized_state(const SystemModel& full, const QuasienergySpectrum& s, int m, int n,
                         int sign, std::size_t cavity) {
  const Complex h = coupling_matrix_element(full, s, m, n, cavity);
  const VectorC a = product_state(full.layout(), s.phi_plus(0), cavity, n);
  const VectorC b = product_state(full.layout(), s.phi_minus(0), cavity, n + 1);
  return (a + static_cast<double>(sign >= 0 ? 1 : -1) * std::polar(1.0, -std::arg(h)) * b) /
         std::sqrt(2.0);
}

std::vector<ResonanceCondition> resonance_map(double detuning, double omega_mod, double delta_eps,
                                              int m_min, int m_max, int nph_min, int nph_max) {
  if (!(omega_mod > 0.0)) throw ParameterError("omega_mod must be positive");
  if (nph_min < 1) throw ParameterError("photon order must be >= 1");
  std::vector<ResonanceCondition> out;
  for (int nph = nph_min; nph <= nph_max; ++nph)
    for (int m = m_min; m <= m_max; ++m)
      out.push_back({m, nph, nph * detuning - m * omega_mod - delta_eps});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::abs(a.offset) < std::abs(b.offset);
  });
  return out;
}

double resonance_detuning(int m, int n_ph, double omega_mod, double delta_eps) {
  if (n_ph < 1) throw ParameterError("photon order must be >= 1");
  return (m * omega_mod + delta_eps) / n_ph;
}

}  // namespace floqstab
