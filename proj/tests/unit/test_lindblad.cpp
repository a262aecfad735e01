#include <catch_amalgamated.hpp>
#include <numbers>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "floqstab/errors.hpp"
#include "floqstab/lindblad.hpp"

using namespace floqstab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;

MatrixC kron2(const MatrixC& a, const MatrixC& b) { return kron(a, b); }

// dense column-stacking Liouvillian built independently of the library
MatrixC liouvillian(const MatrixC& h, const std::vector<Operator<>>& jumps) {
  const int d = static_cast<int>(h.rows());
  const MatrixC id = MatrixC::Identity(d, d);
  const Complex i(0, 1);
  MatrixC l = -i * (kron2(id, h) - kron2(h.transpose(), id));
  for (const auto& j : jumps) {
    const MatrixC& c = j.matrix();
    const MatrixC cdc = c.adjoint() * c;
    l += kron2(c.conjugate(), c) - 0.5 * kron2(id, cdc) - 0.5 * kron2(cdc.transpose(), id);
  }
  return l;
}

MatrixC unvec(const VectorC& v, int d) { return Eigen::Map<const MatrixC>(v.data(), d, d); }
VectorC vec(const MatrixC& m) { return Eigen::Map<const VectorC>(m.data(), m.size()); }

MatrixC random_density(int d, std::mt19937& rng) {
  std::normal_distribution<double> n;
  MatrixC a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(n(rng), n(rng));
  MatrixC rho = a * a.adjoint();
  return rho / rho.trace();
}

IntegratorConfig fixed(int steps) {
  IntegratorConfig c;
  c.steps_per_period = steps;
  c.samples_per_period = 4;
  return c;
}

SystemModel cavity_model(double gamma_phi = 0.02) {
  return SystemModel(DriveProtocol::circular(1.0, 0.8), {{1.0, 0.1, 0.05, 3}}, {0.01, gamma_phi});
}
}  // namespace

TEST_CASE("density matrix basics") {
  const SpaceLayout l({Factor::qubit(), Factor::boson(2)});
  const std::vector<int> lv{1, 2};
  const auto rho = DensityMatrix::pure(l, 3.0 * basis_state(l, lv));
  CHECK(rho.valid());
  CHECK_THAT(rho.purity(), WithinAbs(1.0, 1e-14));
  const MatrixC q = rho.reduced(0), c = rho.reduced(1);
  CHECK_THAT(q(1, 1).real(), WithinAbs(1.0, 1e-14));
  CHECK_THAT(c(2, 2).real(), WithinAbs(1.0, 1e-14));
  CHECK_THAT(q.trace().real(), WithinAbs(1.0, 1e-14));

  const auto mixed = DensityMatrix::maximally_mixed(l);
  CHECK_THAT(mixed.purity(), WithinAbs(1.0 / 6, 1e-14));
  CHECK_THAT(trace_distance(rho.matrix(), mixed.matrix()), WithinAbs(5.0 / 6, 1e-12));

  // partial trace of a product state is the factor
  std::mt19937 rng(1);
  const MatrixC a = random_density(2, rng), b = random_density(3, rng);
  const DensityMatrix prod(l, kron2(a, b));
  CHECK((prod.reduced(0) - a).norm() < 1e-13);
  CHECK((prod.reduced(1) - b).norm() < 1e-13);
  CHECK_THROWS_AS(prod.reduced(2), DimensionError);
  CHECK_THROWS_AS(DensityMatrix(l, MatrixC::Identity(2, 2)), DimensionError);

  const auto q_ops = qubit_ops();
  const DensityMatrix up(SpaceLayout({Factor::qubit()}), a);
  CHECK_THAT(up.expectation(q_ops.sz).real(), WithinAbs((a(1, 1) - a(0, 0)).real(), 1e-14));
  CHECK_FALSE(DensityMatrix(SpaceLayout({Factor::qubit()}), MatrixC::Identity(2, 2)).valid());
}

TEST_CASE("integrator config") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.check());
  c.steps_per_period = 99;
  CHECK_THROWS_AS(c.check(), ParameterError);
  c = {};
  c.samples_per_period = 0;
  CHECK_THROWS_AS(c.check(), ParameterError);

  const auto m = cavity_model();
  c = {};
  CHECK(c.steps_per_period_for(m) == 2000);
  c.max_phase_per_step = 0.1;
  const int n = c.steps_per_period_for(m);
  CHECK(n >= 100);
  CHECK(n == std::max(100, static_cast<int>(std::ceil(m.period() * m.spectral_spread() / 0.1))));
  c.frame = IntegratorConfig::Frame::Cavity;
  CHECK(c.steps_per_period_for(m) <= n);
}

TEST_CASE("lindblad rhs matches the dense Liouvillian") {
  const auto m = cavity_model();
  std::mt19937 rng(7);
  const DensityMatrix rho(m.layout(), random_density(m.dim(), rng));
  const double t = 0.37;
  const MatrixC l = liouvillian(hamiltonian(m, t).matrix(), jump_operators(m));
  const MatrixC expect = unvec(l * vec(rho.matrix()), m.dim());
  const MatrixC got = lindblad_rhs(m, rho, t);
  CHECK((got - expect).norm() < 1e-12);
  CHECK(std::abs(got.trace()) < 1e-13);

  VectorizedLiouvillian v(m);
  CHECK((MatrixC(v.at(t)) - l).norm() < 1e-12);
}

TEST_CASE("static generator agrees with the matrix exponential") {
  // time independent field: rho(t) = exp(L t) rho(0)
  const SystemModel m(DriveProtocol::constant(Field(0.6, 0.2, 0.9), 1.0), {{0.7, 0.15, 0.1, 2}},
                      {0.03, 0.04});
  std::mt19937 rng(3);
  const MatrixC rho0 = random_density(m.dim(), rng);
  const double t1 = 1.5 * m.period();
  const MatrixC l = liouvillian(hamiltonian(m, 0).matrix(), jump_operators(m));
  const MatrixC expect = unvec((l * t1).exp() * vec(rho0), m.dim());
  const auto rho = propagate_density(m, {m.layout(), rho0}, 0.0, t1, fixed(4000));
  CHECK((rho.matrix() - expect).norm() < 1e-9);

  const MatrixC s = propagate_superoperator(m, 0.0, t1, fixed(4000));
  CHECK((s - (l * t1).exp()).norm() < 1e-9);
}

TEST_CASE("analytic decay laws") {
  const SpaceLayout l({Factor::qubit(), Factor::boson(3)});
  const double kappa = 0.3, gamma = 0.2, gphi = 0.1, t1 = 4.0;
  // no field and no coupling: populations decay exponentially, coherences dephase
  const SystemModel m(DriveProtocol::constant(Field(0, 0, 0), 2 * pi / t1), {{0.5, 0.0, kappa, 3}},
                      {gamma, gphi});
  const std::vector<int> e1{1, 1}, g1{0, 1}, e0{1, 0}, g0{0, 0};
  VectorC psi = basis_state(l, e1);
  const auto rho = propagate_density(m, DensityMatrix::pure(l, psi), 0.0, t1, fixed(400));
  const MatrixC q = rho.reduced(0), c = rho.reduced(1);
  CHECK_THAT(q(1, 1).real(), WithinRel(std::exp(-gamma * t1), 1e-8));
  CHECK_THAT(c(1, 1).real(), WithinRel(std::exp(-kappa * t1), 1e-8));

  psi = (basis_state(l, g0) + basis_state(l, e0)) / std::sqrt(2.0);
  const auto coh = propagate_density(m, DensityMatrix::pure(l, psi), 0.0, t1, fixed(400));
  // sqrt(gphi/2) sigma_z damps the coherence at rate gphi, relaxation adds gamma/2
  CHECK_THAT(std::abs(coh.reduced(0)(0, 1)),
             WithinRel(0.5 * std::exp(-(gphi + gamma / 2) * t1), 1e-8));
  (void)g1;
}

TEST_CASE("propagation preserves the density matrix invariants") {
  const auto m = cavity_model();
  std::mt19937 rng(11);
  for (int k = 0; k < 3; ++k) {
    const DensityMatrix rho0(m.layout(), random_density(m.dim(), rng));
    PropagationReport rep;
    int samples = 0;
    auto cfg = fixed(400);
    const auto rho = propagate_density(
        m, rho0, 0.0, 2 * m.period(), cfg,
        [&](double, const MatrixC& r) {
          ++samples;
          CHECK(std::abs(r.trace() - 1.0) < 1e-10);
        },
        &rep);
    CHECK(rho.valid());
    CHECK(samples == 2 * cfg.samples_per_period + 1);
    CHECK(rep.steps == 800);
    CHECK(rep.trace_drift < 1e-12);
    CHECK(rep.hermiticity_correction < 1e-12);
  }
}

TEST_CASE("RK4 converges at fourth order") {
  const SystemModel m(DriveProtocol::circular(12.0, 1.0), {{2.0, 0.3, 0.1, 2}}, {0.02, 0.02});
  const std::vector<int> g0{0, 0};
  const auto rho0 = DensityMatrix::pure(m.layout(), basis_state(m.layout(), g0));
  const MatrixC ref = propagate_density(m, rho0, 0, m.period(), fixed(12800)).matrix();
  const double e1 = (propagate_density(m, rho0, 0, m.period(), fixed(400)).matrix() - ref).norm();
  const double e2 = (propagate_density(m, rho0, 0, m.period(), fixed(800)).matrix() - ref).norm();
  CHECK(e1 > 1e-10);
  CHECK_THAT(std::log2(e1 / e2), WithinAbs(4.0, 0.3));
}

TEST_CASE("cavity frame reproduces lab-frame propagation") {
  const SystemModel m(DriveProtocol::circular(1.0, 0.8), {{3.0, 0.2, 0.05, 3}}, {0.01, 0.02});
  std::mt19937 rng(5);
  const DensityMatrix rho0(m.layout(), random_density(m.dim(), rng));
  auto lab = fixed(16000);
  auto cav = lab;
  cav.frame = IntegratorConfig::Frame::Cavity;
  std::vector<MatrixC> a, b;
  const auto ra = propagate_density(m, rho0, 0.3, 0.3 + 1.5 * m.period(), lab,
                                    [&](double, const MatrixC& r) { a.push_back(r); });
  const auto rb = propagate_density(m, rho0, 0.3, 0.3 + 1.5 * m.period(), cav,
                                    [&](double, const MatrixC& r) { b.push_back(r); });
  CHECK((ra.matrix() - rb.matrix()).norm() < 1e-9);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() < 1e-9);

  const VectorC psi0 = VectorC::Unit(m.dim(), 1);
  const VectorC pa = propagate_state(m.closed(), psi0, 0, m.period(), lab);
  const VectorC pb = propagate_state(m.closed(), psi0, 0, m.period(), cav);
  CHECK((pa - pb).norm() < 1e-9);
}

TEST_CASE("closed evolution is unitary") {
  const auto m = cavity_model().closed();
  const auto cfg = fixed(2000);
  const MatrixC u = propagate_unitary(m, 0, m.period(), cfg);
  const MatrixC id = MatrixC::Identity(m.dim(), m.dim());
  CHECK((u.adjoint() * u - id).norm() < 1e-9);
  const VectorC psi = VectorC::Unit(m.dim(), 3);
  CHECK((propagate_state(m, psi, 0, m.period(), cfg) - u * psi).norm() < 1e-12);

  // excitation number commutes with H for a z-only field
  const SystemModel z(DriveProtocol::constant(Field(0, 0, 1.0), 1.0), {{0.8, 0.3, 0, 3}});
  const MatrixC uz = propagate_unitary(z, 0, z.period(), cfg);
  for (int i = 0; i < z.dim(); ++i)
    for (int j = 0; j < z.dim(); ++j) {
      const auto li = z.layout().levels(i), lj = z.layout().levels(j);
      if (li[0] + li[1] != lj[0] + lj[1]) CHECK(std::abs(uz(i, j)) < 1e-12);
    }
}

TEST_CASE("unstable step size is reported") {
  const SystemModel m(DriveProtocol::circular(1e4, 1.0), {}, {0.01, 0.0});
  const VectorC psi = VectorC::Constant(2, 1.0 / std::sqrt(2.0));
  const auto rho0 = DensityMatrix::pure(m.layout(), psi);
  // the blow-up either trips the trace check or produces non-finite values
  CHECK_THROWS_AS(propagate_density(m, rho0, 0, 3 * m.period(), fixed(100)), AccuracyError);
}
