#include <Eigen/Eigenvalues>
#include <catch_amalgamated.hpp>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "floqstab/floquet.hpp"

using namespace floqstab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;

IntegratorConfig fine() {
  IntegratorConfig c;
  c.steps_per_period = 4000;
  return c;
}

// Circular drive in the frame rotating about y: H_rot = B0/2 sz - omega/2 sy, so
// psi(t) = exp(-i omega t sy / 2) chi exp(-i E t) with (E, chi) eigenpairs of H_rot.
struct RotatingFrameOracle {
  double B0, omega;
  MatrixC sy, sz;
  Eigen::SelfAdjointEigenSolver<MatrixC> es;

  RotatingFrameOracle(double b, double w)
      : B0(b),
        omega(w),
        sy(qubit_ops().sy.matrix()),
        sz(qubit_ops().sz.matrix()),
        es(MatrixC(0.5 * b * sz - 0.5 * w * sy)) {}

  // index of the eigenvector with the larger period-averaged energy <chi| B0/2 sz |chi>
  int plus() const {
    auto e = [&](int i) {
      return (es.eigenvectors().col(i).adjoint() * sz * es.eigenvectors().col(i))(0).real();
    };
    return e(0) > e(1) ? 0 : 1;
  }
  VectorC psi(int i, double t) const {
    const MatrixC r = (Complex(0, -0.5 * omega * t) * sy).exp();
    return r * es.eigenvectors().col(i) * std::polar(1.0, -es.eigenvalues()(i) * t);
  }
};
}  // namespace

TEST_CASE("quasienergy folding") {
  CHECK(fold_quasienergy(0.5, 1.0) == -0.5);
  CHECK(fold_quasienergy(-0.5, 1.0) == -0.5);
  CHECK_THAT(fold_quasienergy(1.3, 1.0), WithinAbs(0.3, 1e-15));
  CHECK_THAT(fold_quasienergy(-2.7, 1.0), WithinAbs(0.3, 1e-15));
  for (double e : {-3.2, -0.1, 0.0, 0.49, 7.77}) {
    const double f = fold_quasienergy(e, 0.6);
    CHECK(f >= -0.3);
    CHECK(f < 0.3);
    CHECK_THAT(std::remainder(f - e, 0.6), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("quasienergies of a diagonal monodromy") {
  const double T = 2.0;
  MatrixC u = MatrixC::Zero(3, 3);
  const double e[3] = {0.9, -0.2, 0.4};
  for (int i = 0; i < 3; ++i) u(i, i) = std::polar(1.0, -e[i] * T);
  const auto s = quasienergies(u, T);
  REQUIRE(s.quasienergies.size() == 3);
  CHECK_THAT(s.omega_mod, WithinRel(pi, 1e-15));
  CHECK_THAT(s.quasienergies[0], WithinAbs(-0.2, 1e-12));
  CHECK_THAT(s.quasienergies[1], WithinAbs(0.4, 1e-12));
  CHECK_THAT(s.quasienergies[2], WithinAbs(0.9 - pi, 1e-12) || WithinAbs(0.9, 1e-12));
  for (const auto& v : s.modes) CHECK_THAT(v.norm(), WithinAbs(1.0, 1e-14));
  CHECK_THROWS_AS(quasienergies(2.0 * u, T), ParameterError);
  CHECK_THROWS_AS(quasienergies(u, 0.0), ParameterError);
}

TEST_CASE("static field quasienergies") {
  const double b = 0.35, w = 1.0;
  const SystemModel m(DriveProtocol::constant(Field(0.21, 0.0, 0.28), w));
  const auto s = quasienergies(monodromy(m, fine()), m.period());
  CHECK_THAT(s.quasienergies[0], WithinAbs(-b / 2, 1e-10));
  CHECK_THAT(s.quasienergies[1], WithinAbs(b / 2, 1e-10));
}

TEST_CASE("circular drive matches the rotating-frame solution") {
  for (auto [B0, w] : {std::pair{1.0, 0.3}, std::pair{1.0, 1.0}, std::pair{2.0, 0.7}}) {
    const SystemModel m(DriveProtocol::circular(B0, w));
    const MatrixC u = monodromy(m, fine());
    CHECK(unitarity_defect(u) < 1e-10);
    const auto s = periodic_states(m, quasienergies(u, m.period()), 64, fine());
    const double omega_r = std::sqrt(B0 * B0 + w * w);
    const double e = fold_quasienergy(0.5 * omega_r + 0.5 * w, w);
    CHECK_THAT(std::abs(s.quasienergies[0]), WithinAbs(std::abs(e), 1e-9));
    CHECK_THAT(s.quasienergies[0], WithinAbs(-s.quasienergies[1], 1e-9));
    // Delta epsilon = Omega - omega modulo omega
    CHECK_THAT(std::remainder(s.delta_epsilon() - (omega_r - w), w), WithinAbs(0.0, 1e-9));
    CHECK(s.periodicity_defect < 1e-8);
    CHECK(s.mean_energies[s.plus] > s.mean_energies[s.minus]);
  }
  // frozen values: B0 = 1, omega = 0.3 gives +-0.0720153; omega = 1 gives delta eps = sqrt2 - 1
  const auto a = qubit_spectrum(SystemModel(DriveProtocol::circular(1.0, 0.3)), 16, fine());
  CHECK_THAT(std::abs(a.eps_plus()), WithinAbs(0.0720153, 1e-7));
  const auto b = qubit_spectrum(SystemModel(DriveProtocol::circular(1.0, 1.0)), 16, fine());
  CHECK_THAT(b.delta_epsilon(), WithinAbs(std::sqrt(2.0) - 1.0, 1e-9));
}

TEST_CASE("periodic states solve the rotating-frame problem") {
  const double B0 = 1.0, w = 1.0;
  const RotatingFrameOracle o(B0, w);
  const auto s = qubit_spectrum(SystemModel(DriveProtocol::circular(B0, w)), 64, fine());
  const int p = o.plus();
  for (int k = 0; k < s.samples(); k += 7) {
    const double t = s.times[k];
    // identical up to a global phase: |<oracle|lib>| = 1
    CHECK_THAT(std::abs(o.psi(p, t).dot(s.phi_plus(k))), WithinAbs(1.0, 1e-9));
    CHECK_THAT(std::abs(o.psi(1 - p, t).dot(s.phi_minus(k))), WithinAbs(1.0, 1e-9));
    CHECK_THAT(s.phi_plus(k).norm(), WithinAbs(1.0, 1e-10));
    CHECK(std::abs(s.phi_plus(k).dot(s.phi_minus(k))) < 1e-9);
  }
}

TEST_CASE("coupling matrix elements") {
  const double B0 = 1.0, w = 1.0, g = 0.05;
  const SystemModel full(DriveProtocol::circular(B0, w), {{0.4, g, 0.05, 4}}, {0.0025, 0.0});
  const auto s = qubit_spectrum(full, 256, fine());

  // oracle: g sqrt(n+1) (1/T) int e^{-i m w t} <phi_+(t)|s+|phi_-(t)> with the library's
  // folded quasienergies fixing each state's harmonic offset
  const RotatingFrameOracle o(B0, w);
  const int p = o.plus();
  const MatrixC sp = qubit_ops().sp.matrix();
  const int n_t = 512;
  for (int n : {0, 1}) {
    double total = 0.0;
    for (int mi = -4; mi <= 4; ++mi) {
      Complex sum = 0;
      for (int k = 0; k < n_t; ++k) {
        const double t = k * s.period() / n_t;
        const VectorC a = o.psi(p, t) * std::polar(1.0, s.eps_plus() * t);
        const VectorC b = o.psi(1 - p, t) * std::polar(1.0, s.eps_minus() * t);
        sum += std::polar(1.0, -mi * w * t) * a.dot(sp * b);
      }
      const double expect = g * std::sqrt(n + 1.0) * std::abs(sum) / n_t;
      const double got = std::abs(coupling_matrix_element(full, s, mi, n));
      CHECK_THAT(got, WithinAbs(expect, 1e-9));
      total += got * got;
    }
    CHECK(total > 0.0);
  }
  // frozen magnitudes for this point, decreasing with m and vanishing from m = 3
  CHECK_THAT(std::abs(coupling_matrix_element(full, s, 0, 0)), WithinAbs(0.02134, 1e-5));
  CHECK_THAT(std::abs(coupling_matrix_element(full, s, 1, 0)), WithinAbs(0.01768, 1e-5));
  CHECK_THAT(std::abs(coupling_matrix_element(full, s, 2, 0)), WithinAbs(0.00366, 1e-5));
  CHECK(std::abs(coupling_matrix_element(full, s, 3, 0)) < 1e-10);
  const auto best = strongest_representative(full, s, 0, 3);
  CHECK(best.m == 0);

  CHECK_THROWS_AS(coupling_matrix_element(full, s, 0, 4), ParameterError);
  CHECK_THROWS_AS(coupling_matrix_element(full, qubit_spectrum(full, 16, fine()), 0, 0),
                  ParameterError);
  CHECK_THROWS_AS(strongest_representative(full, s, 2, 1), ParameterError);

  for (int sign : {1, -1}) {
    const VectorC h = hybridized_state(full, s, 0, 0, sign);
    CHECK_THAT(h.norm(), WithinAbs(1.0, 1e-10));
  }
  const VectorC hp = hybridized_state(full, s, 0, 0, 1), hm = hybridized_state(full, s, 0, 0, -1);
  CHECK(std::abs(hp.dot(hm)) < 1e-10);
}

TEST_CASE("product states and resonance helpers") {
  const SpaceLayout l({Factor::qubit(), Factor::boson(2), Factor::boson(3)});
  VectorC q(2);
  q << Complex(0.6, 0), Complex(0, 0.8);
  const VectorC v = product_state(l, q, 1, 2);
  const std::vector<int> g{0, 0, 2}, e{1, 0, 2};
  CHECK(v(l.index(g)) == q(0));
  CHECK(v(l.index(e)) == q(1));
  CHECK_THAT(v.norm(), WithinAbs(1.0, 1e-15));
  CHECK_THROWS_AS(product_state(l, q, 2, 0), DimensionError);

  CHECK_THAT(resonance_detuning(0, 1, 1.0, 0.4142), WithinAbs(0.4142, 1e-15));
  CHECK_THAT(resonance_detuning(1, 2, 1.0, 0.4142), WithinAbs(0.7071, 1e-15));
  CHECK_THROWS_AS(resonance_detuning(0, 0, 1.0, 0.1), ParameterError);
  CHECK(adiabatic_detuning(5.0, 3.0) == 2.0);

  const auto map = resonance_map(0.71, 1.0, 0.4142, 0, 3, 1, 2);
  REQUIRE(map.size() == 8);
  CHECK(map[0].m == 1);
  CHECK(map[0].n_ph == 2);
  for (std::size_t i = 1; i < map.size(); ++i)
    CHECK(std::abs(map[i - 1].offset) <= std::abs(map[i].offset));
  for (const auto& r : map)
    CHECK_THAT(r.offset, WithinAbs(r.n_ph * 0.71 - r.m * 1.0 - 0.4142, 1e-15));
  CHECK_THROWS_AS(resonance_map(0.7, 0.0, 0.4, 0, 1), ParameterError);
}

TEST_CASE("spectrum guards") {
  const SystemModel m(DriveProtocol::circular(1.0, 1.0));
  QuasienergySpectrum empty;
  CHECK_THROWS_AS(empty.delta_epsilon(), ParameterError);
  const auto s = quasienergies(monodromy(m, fine()), m.period());
  CHECK_THROWS_AS(periodic_states(m, s, 1, fine()), ParameterError);
  CHECK_THROWS_AS(periodic_states(SystemModel(DriveProtocol::circular(1.0, 2.0)), s, 16, fine()),
                  ParameterError);
  // zero field: degenerate monodromy
  const SystemModel z(DriveProtocol::constant(Field(0, 0, 0), 1.0));
  CHECK_THROWS_AS(periodic_states(z, quasienergies(monodromy(z, fine()), z.period()), 16, fine()),
                  ParameterError);
}
