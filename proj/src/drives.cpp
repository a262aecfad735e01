#include "floqstab/drives.hpp"

#include <cmath>
#include <sstream>

namespace floqstab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_finite_positive(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0)
    throw ParameterError(std::string(what) + " must be positive and finite");
}

void require_non_negative(double v, const std::string& what) {
  if (!std::isfinite(v) || v < 0.0) throw ParameterError(what + " must be >= 0");
}

}  // namespace

DriveProtocol::DriveProtocol(Kind kind, double b0, double bx, double bz, double omega)
    : kind_(kind), b0_(b0), bx_(bx), bz_(bz), omega_(omega) {
  require_finite_positive(omega, "omega_mod");
  if (!std::isfinite(b0) || !std::isfinite(bx) || !std::isfinite(bz))
    throw ParameterError("drive amplitudes must be finite");
}

DriveProtocol DriveProtocol::circular(double B0, double omega_mod) {
  return {Kind::Circular, B0, B0, B0, omega_mod};
}

DriveProtocol DriveProtocol::semicircle(double B0, double omega_mod) {
  return {Kind::Semicircle, B0, B0, B0, omega_mod};
}

DriveProtocol DriveProtocol::elliptical(double bx_amp, double bz_amp, double omega_mod) {
  return {Kind::Elliptical, std::max(std::abs(bx_amp), std::abs(bz_amp)), bx_amp, bz_amp,
          omega_mod};
}

DriveProtocol DriveProtocol::constant(const Field& field, double omega_mod) {
  DriveProtocol d(Kind::Static, field.norm(), 0, 0, omega_mod);
  d.static_ = field;
  return d;
}

Field DriveProtocol::field(double t) const {
  // phase reduced mod 2 pi so B(t + T) == B(t) up to the reduction itself
  const double phase = std::fmod(omega_ * t, two_pi);
  const double c = std::cos(phase), s = std::sin(phase);
  switch (kind_) {
    case Kind::Circular:
      return {b0_ * s, 0.0, b0_ * c};
    case Kind::Semicircle:
      return {b0_ * std::max(0.0, s), 0.0, b0_ * c};
    case Kind::Elliptical:
      return {bx_ * s, 0.0, bz_ * c};
    case Kind::Static:
      return static_;
  }
  return {0, 0, 0};
}

double DriveProtocol::max_field() const {
  switch (kind_) {
    case Kind::Circular:
    case Kind::Semicircle:
      return std::abs(b0_);
    case Kind::Elliptical:
      return std::max(std::abs(bx_), std::abs(bz_));
    case Kind::Static:
      return static_.norm();
  }
  return 0.0;
}

std::string to_string(DriveProtocol::Kind kind) {
  switch (kind) {
    case DriveProtocol::Kind::Circular: return "circular";
    case DriveProtocol::Kind::Semicircle: return "semicircle";
    case DriveProtocol::Kind::Elliptical: return "elliptical";
    case DriveProtocol::Kind::Static: return "static";
  }
  return "?";
}

SystemModel::SystemModel(DriveProtocol drive, std::vector<Cavity> cavities, QubitRates rates)
    : drive_(drive), cavities_(std::move(cavities)), rates_(rates) {
  require_non_negative(rates_.relaxation, "qubit relaxation rate");
  require_non_negative(rates_.dephasing, "qubit dephasing rate");
  std::vector<Factor> factors{Factor::qubit()};
  for (std::size_t c = 0; c < cavities_.size(); ++c) {
    const auto& cav = cavities_[c];
    require_non_negative(cav.loss_rate, "cavity " + std::to_string(c) + " loss rate");
    if (!std::isfinite(cav.detuning) || !std::isfinite(cav.coupling))
      throw ParameterError("cavity " + std::to_string(c) + " parameters must be finite");
    factors.push_back(Factor::boson(cav.truncation));
  }
  layout_ = SpaceLayout(std::move(factors));

  const int d = layout_.total_dim();
  const auto q = qubit_ops();
  const Operator<> sm = embed(q.sm, 0, layout_);
  field_terms_ = {embed(q.sx, 0, layout_).matrix() * 0.5, embed(q.sy, 0, layout_).matrix() * 0.5,
                  embed(q.sz, 0, layout_).matrix() * 0.5};

  h_static_ = MatrixC::Zero(d, d);
  frame_ = Eigen::VectorXd::Zero(d);
  for (std::size_t c = 0; c < cavities_.size(); ++c) {
    const auto b = boson_ops(cavities_[c].truncation);
    const Operator<> a = embed(b.a, c + 1, layout_);
    const Operator<> n = embed(b.n, c + 1, layout_);
    h_static_ += cavities_[c].detuning * n.matrix();
    frame_ += cavities_[c].detuning * n.matrix().diagonal().real();
    const MatrixC jc = a.matrix().adjoint() * sm.matrix();
    h_static_ += cavities_[c].coupling * (jc + jc.adjoint());
  }
}

Operator<> SystemModel::hamiltonian(double t) const {
  const Field b = drive_.field(t);
  MatrixC h = h_static_;
  for (int a = 0; a < 3; ++a)
    if (b[a] != 0.0) h += b[a] * field_terms_[a];
  return {layout_, std::move(h)};
}

std::vector<Dissipator> SystemModel::dissipators() const {
  std::vector<Dissipator> out;
  const auto q = qubit_ops();
  for (std::size_t c = 0; c < cavities_.size(); ++c)
    out.push_back({embed(boson_ops(cavities_[c].truncation).a, c + 1, layout_),
                   cavities_[c].loss_rate, "cavity " + std::to_string(c) + " loss"});
  out.push_back({embed(q.sm, 0, layout_), rates_.relaxation, "qubit relaxation"});
  // off-diagonal qubit coherence decays at gamma_phi with this normalization
  out.push_back({embed(q.sz, 0, layout_), rates_.dephasing / 2.0, "qubit dephasing"});
  return out;
}

bool SystemModel::dissipative() const {
  for (const auto& d : dissipators())
    if (d.rate > 0.0) return true;
  return false;
}

double SystemModel::spectral_spread(bool include_cavity_frame) const {
  double spread = drive_.max_field();
  for (const auto& c : cavities_) {
    if (include_cavity_frame) spread += std::abs(c.detuning) * c.truncation;
    spread += 2.0 * std::abs(c.coupling) * std::sqrt(static_cast<double>(c.truncation));
  }
  return spread;
}

SystemModel SystemModel::closed() const {
  auto cav = cavities_;
  for (auto& c : cav) c.loss_rate = 0.0;
  return {drive_, std::move(cav), {}};
}

SystemModel SystemModel::qubit_only() const { return {drive_, {}, rates_}; }

SystemModel SystemModel::with_drive(DriveProtocol drive) const {
  return {drive, cavities_, rates_};
}

std::vector<std::string> SystemModel::validate() const {
  std::vector<std::string> warnings;
  auto warn = [&](const std::string& s) { warnings.push_back(s); };
  const double gamma = rates_.relaxation + rates_.dephasing;
  for (std::size_t i = 0; i < cavities_.size(); ++i) {
    const auto& c = cavities_[i];
    std::ostringstream tag;
    tag << "cavity " << i << ": ";
    if (c.loss_rate > 0.0 && gamma >= c.loss_rate)
      warn(tag.str() + "qubit decay (" + std::to_string(gamma) + ") not below kappa (" +
           std::to_string(c.loss_rate) + ")");
    if (c.coupling != 0.0 && c.loss_rate > std::abs(c.coupling))
      warn(tag.str() + "kappa exceeds g; hybridization is overdamped");
    if (c.coupling != 0.0 && std::abs(c.coupling) > 0.2 * std::abs(c.detuning))
      warn(tag.str() + "g is not small compared to Delta");
  }
  return warnings;
}

Operator<> hamiltonian(const SystemModel& model, double t) { return model.hamiltonian(t); }

std::vector<Operator<>> jump_operators(const SystemModel& model) {
  std::vector<Operator<>> out;
  for (const auto& d : model.dissipators())
    if (d.rate > 0.0) out.push_back(d.op * Complex(std::sqrt(d.rate)));
  return out;
}

}  // namespace floqstab
