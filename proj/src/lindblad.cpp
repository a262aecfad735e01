#include "floqstab/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Eigenvalues>

namespace floqstab {

namespace {

const Complex I(0.0, 1.0);

SparseC to_sparse(const MatrixC& m) {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0) trip.emplace_back(i, j, m(i, j));
  SparseC s(m.rows(), m.cols());
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

// structural union of the pieces, with every stored entry set to zero
SparseC union_pattern(const std::vector<const SparseC*>& pieces, Eigen::Index n) {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (const SparseC* p : pieces)
    for (int k = 0; k < p->outerSize(); ++k)
      for (SparseC::InnerIterator it(*p, k); it; ++it) trip.emplace_back(it.row(), it.col(), 0.0);
  SparseC s(n, n);
  s.setFromTriplets(trip.begin(), trip.end(), [](const Complex& a, const Complex&) { return a; });
  s.makeCompressed();
  return s;
}

// values of piece laid out on the pattern's storage order
std::vector<Complex> align(const SparseC& pattern, const SparseC& piece) {
  std::vector<Complex> out(pattern.nonZeros(), 0.0);
  const auto* outer = pattern.outerIndexPtr();
  const auto* inner = pattern.innerIndexPtr();
  for (int k = 0; k < piece.outerSize(); ++k)
    for (SparseC::InnerIterator it(piece, k); it; ++it) {
      const auto* first = inner + outer[k];
      const auto* last = inner + outer[k + 1];
      const auto* pos = std::lower_bound(first, last, static_cast<int>(it.index()));
      out[pos - inner] = it.value();
    }
  return out;
}

SparseC sparse_kron(const SparseC& a, const SparseC& b) {
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SparseC::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SparseC::InnerIterator ib(b, kb); ib; ++ib)
          trip.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                            ia.value() * ib.value());
  SparseC s(a.rows() * b.rows(), a.cols() * b.cols());
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

SparseC sparse_identity(int n) {
  SparseC s(n, n);
  s.setIdentity();
  return s;
}

MatrixC damping(const std::vector<Operator<>>& jumps, int d) {
  MatrixC out = MatrixC::Zero(d, d);
  for (const auto& l : jumps) out -= 0.5 * l.matrix().adjoint() * l.matrix();
  return out;
}

struct StepGrid {
  int steps;
  int stride;  // observer cadence in steps
};

StepGrid make_grid(const SystemModel& model, const IntegratorConfig& cfg, double t0, double t1,
                   bool observed) {
  cfg.check();
  if (!(t1 >= t0) || !std::isfinite(t0) || !std::isfinite(t1))
    throw ParameterError("propagation interval must satisfy t1 >= t0");
  const double periods = (t1 - t0) / model.period();
  const int spp = cfg.steps_per_period_for(model);
  if (!observed) {
    const int n = std::max(1, static_cast<int>(std::ceil(periods * spp - 1e-9)));
    return {n, n};
  }
  const int intervals = std::max(1, static_cast<int>(std::llround(periods * cfg.samples_per_period)));
  const int stride = std::max(1, (spp + cfg.samples_per_period - 1) / cfg.samples_per_period);
  return {intervals * stride, stride};
}

template <typename Rhs, typename Obs>
void rk4(Rhs&& f, MatrixC& x, double t0, double t1, const StepGrid& grid, Obs&& observe) {
  const double h = (t1 - t0) / grid.steps;
  MatrixC k1, k2, k3, k4, y;
  observe(t0, x);
  for (int s = 0; s < grid.steps; ++s) {
    const double t = t0 + s * h;
    f(t, x, k1);
    y = x + (0.5 * h) * k1;
    f(t + 0.5 * h, y, k2);
    y = x + (0.5 * h) * k2;
    f(t + 0.5 * h, y, k3);
    y = x + h * k3;
    f(t + h, y, k4);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((s + 1) % grid.stride == 0) observe(t0 + (s + 1) * h, x);
  }
}

}  // namespace

DensityMatrix::DensityMatrix(SpaceLayout layout, MatrixC matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != layout_.total_dim() || matrix_.cols() != layout_.total_dim())
    throw DimensionError("density matrix does not match its layout");
}

DensityMatrix DensityMatrix::pure(const SpaceLayout& layout, const VectorC& psi) {
  if (psi.size() != layout.total_dim()) throw DimensionError("state does not match layout");
  const VectorC v = psi / psi.norm();
  return {layout, v * v.adjoint()};
}

DensityMatrix DensityMatrix::maximally_mixed(const SpaceLayout& layout) {
  const int d = layout.total_dim();
  return {layout, MatrixC::Identity(d, d) / static_cast<double>(d)};
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
  const MatrixC h = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixC> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double DensityMatrix::hermiticity_defect() const {
  return (matrix_ - matrix_.adjoint()).norm();
}

Complex DensityMatrix::expectation(const Operator<>& op) const {
  if (!(op.layout() == layout_)) throw DimensionError("observable lives on a different layout");
  return (matrix_ * op.matrix()).trace();
}

MatrixC DensityMatrix::reduced(std::size_t factor) const {
  if (factor >= layout_.size()) throw DimensionError("factor index out of range");
  int left = 1, right = 1;
  for (std::size_t i = 0; i < factor; ++i) left *= layout_.factor_dim(i);
  for (std::size_t i = factor + 1; i < layout_.size(); ++i) right *= layout_.factor_dim(i);
  const int d = layout_.factor_dim(factor);
  MatrixC out = MatrixC::Zero(d, d);
  for (int l = 0; l < left; ++l)
    for (int r = 0; r < right; ++r)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          out(a, b) += matrix_((l * d + a) * right + r, (l * d + b) * right + r);
  return out;
}

bool DensityMatrix::valid(double herm_tol, double trace_tol, double pos_tol) const {
  return hermiticity_defect() <= herm_tol && std::abs(trace() - 1.0) <= trace_tol &&
         min_eigenvalue() >= -pos_tol;
}

double trace_distance(const MatrixC& a, const MatrixC& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("shape mismatch");
  const MatrixC diff = a - b;
  Eigen::SelfAdjointEigenSolver<MatrixC> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

void IntegratorConfig::check() const {
  if (steps_per_period < 100) throw ParameterError("steps_per_period must be >= 100");
  if (samples_per_period < 1) throw ParameterError("samples_per_period must be >= 1");
  if (!(max_phase_per_step >= 0.0)) throw ParameterError("max_phase_per_step must be >= 0");
}

int IntegratorConfig::steps_per_period_for(const SystemModel& model) const {
  if (max_phase_per_step <= 0.0) return steps_per_period;
  const double spread = model.spectral_spread(frame == Frame::Lab);
  const double n = std::ceil(model.period() * spread / max_phase_per_step);
  return std::max(100, static_cast<int>(std::min(n, 1e8)));
}

LindbladGenerator::LindbladGenerator(const SystemModel& model, IntegratorConfig::Frame frame)
    : model_(&model), cavity_frame_(frame == IntegratorConfig::Frame::Cavity) {
  const int d = model.dim();
  const auto jump_ops = jump_operators(model);
  MatrixC h = model.static_part();
  if (cavity_frame_) h.diagonal() -= model.cavity_frame().cast<Complex>();

  const SparseC hs = to_sparse(-I * h);
  const SparseC ds = to_sparse(damping(jump_ops, d));
  std::array<SparseC, 3> fs;
  for (int a = 0; a < 3; ++a) fs[a] = to_sparse(-I * model.field_terms()[a]);
  pattern_ = union_pattern({&hs, &ds, &fs[0], &fs[1], &fs[2]}, d);
  static_values_ = align(pattern_, hs);
  damping_values_ = align(pattern_, ds);
  for (int a = 0; a < 3; ++a) field_values_[a] = align(pattern_, fs[a]);

  const Eigen::VectorXd& f = model.cavity_frame();
  frame_freq_.assign(pattern_.nonZeros(), 0.0);
  for (int k = 0; k < pattern_.outerSize(); ++k)
    for (SparseC::InnerIterator it(pattern_, k); it; ++it)
      frame_freq_[&it.valueRef() - pattern_.valuePtr()] = f(it.row()) - f(it.col());

  for (const auto& l : jump_ops) {
    jumps_.push_back(to_sparse(l.matrix()));
    if (!cavity_frame_) continue;
    // L_I(t) = e^{-i nu t} L only if every element shifts the frame energy by the same nu
    std::optional<double> nu;
    for (int k = 0; k < jumps_.back().outerSize(); ++k)
      for (SparseC::InnerIterator it(jumps_.back(), k); it; ++it) {
        const double v = f(it.row()) - f(it.col());
        if (!nu) nu = v;
        else if (std::abs(*nu - v) > 1e-12 * (1.0 + f.cwiseAbs().maxCoeff()))
          throw ParameterError("jump operator is not covariant under the cavity frame");
      }
  }
  tmp_.resize(d, d);
}

void LindbladGenerator::refresh(double t, bool hamiltonian_only) {
  if (t == cached_t_ && hamiltonian_only == cached_h_only_) return;
  const Field b = model_->drive().field(t);
  Complex* v = pattern_.valuePtr();
  const auto n = static_cast<std::size_t>(pattern_.nonZeros());
  for (std::size_t k = 0; k < n; ++k) {
    Complex s = static_values_[k];
    if (!hamiltonian_only) s += damping_values_[k];
    if (cavity_frame_ && frame_freq_[k] != 0.0) s *= std::polar(1.0, frame_freq_[k] * t);
    v[k] = s + b[0] * field_values_[0][k] + b[1] * field_values_[1][k] + b[2] * field_values_[2][k];
  }
  cached_t_ = t;
  cached_h_only_ = hamiltonian_only;
}

const SparseC& LindbladGenerator::effective(double t) {
  refresh(t, false);
  return pattern_;
}

void LindbladGenerator::apply_hermitian(double t, const MatrixC& x, MatrixC& out) {
  refresh(t, false);
  tmp_.noalias() = pattern_ * x;
  out = tmp_ + tmp_.adjoint();
  for (const auto& l : jumps_) {
    tmp_.noalias() = l * x;
    // L x L^dag = L (L x^dag)^dag = L (L x)^dag for Hermitian x
    out.noalias() += l * tmp_.adjoint();
  }
}

void LindbladGenerator::apply(double t, const MatrixC& x, MatrixC& out) {
  refresh(t, false);
  out.noalias() = pattern_ * x;
  tmp_.noalias() = pattern_ * x.adjoint();
  out += tmp_.adjoint();
  for (const auto& l : jumps_) {
    tmp_.noalias() = l * x.adjoint();
    out.noalias() += l * tmp_.adjoint();
  }
}

void LindbladGenerator::apply_schrodinger(double t, const MatrixC& psi, MatrixC& out) {
  refresh(t, true);
  out.noalias() = pattern_ * psi;
}

void LindbladGenerator::to_frame(double t, MatrixC& rho) const {
  if (!cavity_frame_) return;
  const Eigen::VectorXd& f = model_->cavity_frame();
  for (Eigen::Index j = 0; j < rho.cols(); ++j)
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
      if (f(i) != f(j)) rho(i, j) *= std::polar(1.0, (f(i) - f(j)) * t);
}

void LindbladGenerator::from_frame(double t, MatrixC& rho) const { to_frame(-t, rho); }

void LindbladGenerator::state_to_frame(double t, MatrixC& psi) const {
  if (!cavity_frame_) return;
  const Eigen::VectorXd& f = model_->cavity_frame();
  for (Eigen::Index i = 0; i < psi.rows(); ++i)
    if (f(i) != 0.0) psi.row(i) *= std::polar(1.0, f(i) * t);
}

void LindbladGenerator::state_from_frame(double t, MatrixC& psi) const {
  state_to_frame(-t, psi);
}

VectorizedLiouvillian::VectorizedLiouvillian(const SystemModel& model)
    : model_(&model), d_(model.dim()) {
  const auto jump_ops = jump_operators(model);
  const SparseC id = sparse_identity(d_);
  const SparseC k = to_sparse(-I * model.static_part() + damping(jump_ops, d_));
  SparseC s = sparse_kron(id, k) + sparse_kron(SparseC(k.conjugate()), id);
  for (const auto& l : jump_ops) {
    const SparseC ls = to_sparse(l.matrix());
    s += sparse_kron(SparseC(ls.conjugate()), ls);
  }
  std::array<SparseC, 3> fs;
  for (int a = 0; a < 3; ++a) {
    const SparseC p = to_sparse(-I * model.field_terms()[a]);
    fs[a] = sparse_kron(id, p) + sparse_kron(SparseC(p.conjugate()), id);
  }
  pattern_ = union_pattern({&s, &fs[0], &fs[1], &fs[2]}, static_cast<Eigen::Index>(d_) * d_);
  static_values_ = align(pattern_, s);
  for (int a = 0; a < 3; ++a) field_values_[a] = align(pattern_, fs[a]);
}

const SparseC& VectorizedLiouvillian::at(double t) {
  if (t == cached_t_) return pattern_;
  const Field b = model_->drive().field(t);
  Complex* v = pattern_.valuePtr();
  for (std::size_t k = 0; k < static_values_.size(); ++k)
    v[k] = static_values_[k] + b[0] * field_values_[0][k] + b[1] * field_values_[1][k] +
           b[2] * field_values_[2][k];
  cached_t_ = t;
  return pattern_;
}

MatrixC lindblad_rhs(const SystemModel& model, const DensityMatrix& rho, double t) {
  if (!(rho.layout() == model.layout()))
    throw DimensionError("density matrix layout does not match the model");
  LindbladGenerator gen(model, IntegratorConfig::Frame::Lab);
  MatrixC out;
  gen.apply(t, rho.matrix(), out);
  return out;
}

DensityMatrix propagate_density(const SystemModel& model, const DensityMatrix& rho0, double t0,
                                double t1, const IntegratorConfig& cfg,
                                const DensityObserver& observer, PropagationReport* report) {
  if (!(rho0.layout() == model.layout()))
    throw DimensionError("initial state layout does not match the model");
  const StepGrid grid = make_grid(model, cfg, t0, t1, static_cast<bool>(observer));
  LindbladGenerator gen(model, cfg.frame);
  MatrixC x = rho0.matrix();
  gen.to_frame(t0, x);
  MatrixC lab;
  auto observe = [&](double t, const MatrixC& s) {
    if (!observer) return;
    lab = s;
    gen.from_frame(t, lab);
    observer(t, lab);
  };
  rk4([&](double t, const MatrixC& y, MatrixC& out) { gen.apply_hermitian(t, y, out); }, x, t0,
      t1, grid, observe);
  gen.from_frame(t1, x);

  const Complex tr = x.trace();
  const double drift = std::abs(tr - rho0.trace());
  if (!(drift <= 1e-6))
    throw AccuracyError("trace drifted by " + std::to_string(drift) +
                        " during propagation; increase steps_per_period");
  const MatrixC herm = 0.5 * (x + x.adjoint());
  const double herm_corr = (x - herm).norm();
  if (report) *report = {grid.steps, drift, herm_corr};
  return {model.layout(), herm / herm.trace().real()};
}

MatrixC propagate_columns(const SystemModel& model, const MatrixC& psi0, double t0, double t1,
                          const IntegratorConfig& cfg, const StateObserver& observer) {
  if (psi0.rows() != model.dim()) throw DimensionError("state does not match the model");
  const StepGrid grid = make_grid(model, cfg, t0, t1, static_cast<bool>(observer));
  LindbladGenerator gen(model, cfg.frame);
  MatrixC x = psi0;
  gen.state_to_frame(t0, x);
  MatrixC lab;
  auto observe = [&](double t, const MatrixC& s) {
    if (!observer) return;
    lab = s;
    gen.state_from_frame(t, lab);
    observer(t, lab);
  };
  rk4([&](double t, const MatrixC& y, MatrixC& out) { gen.apply_schrodinger(t, y, out); }, x, t0,
      t1, grid, observe);
  gen.state_from_frame(t1, x);
  return x;
}

VectorC propagate_state(const SystemModel& model, const VectorC& psi0, double t0, double t1,
                        const IntegratorConfig& cfg) {
  if (model.dissipative()) warn("propagate_state ignores the model's dissipators");
  return propagate_columns(model, psi0, t0, t1, cfg).col(0);
}

MatrixC propagate_unitary(const SystemModel& model, double t0, double t1,
                          const IntegratorConfig& cfg, const StateObserver& observer) {
  const int d = model.dim();
  return propagate_columns(model, MatrixC::Identity(d, d), t0, t1, cfg, observer);
}

MatrixC propagate_superoperator(const SystemModel& model, double t0, double t1,
                                const IntegratorConfig& cfg) {
  IntegratorConfig lab = cfg;
  lab.frame = IntegratorConfig::Frame::Lab;
  const StepGrid grid = make_grid(model, lab, t0, t1, false);
  const int d = model.dim();
  const int d2 = d * d;

  // only matrix units E_ij with i <= j are propagated; Phi(E_ji) = Phi(E_ij)^dag
  std::vector<std::pair<int, int>> units;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i <= j; ++i) units.emplace_back(i, j);
  MatrixC x = MatrixC::Zero(d2, static_cast<Eigen::Index>(units.size()));
  for (std::size_t c = 0; c < units.size(); ++c) x(units[c].first + units[c].second * d, c) = 1.0;

  VectorizedLiouvillian liou(model);
  rk4([&](double t, const MatrixC& y, MatrixC& out) { out.noalias() = liou.at(t) * y; }, x, t0,
      t1, grid, [](double, const MatrixC&) {});

  MatrixC s(d2, d2);
  for (std::size_t c = 0; c < units.size(); ++c) {
    const auto [i, j] = units[c];
    s.col(i + j * d) = x.col(c);
    if (i == j) continue;
    const Eigen::Map<const MatrixC> m(x.col(c).data(), d, d);
    const MatrixC adj = m.adjoint();
    s.col(j + i * d) = Eigen::Map<const VectorC>(adj.data(), d2);
  }
  return s;
}

}  // namespace floqstab
