#include <Eigen/Eigenvalues>
#include <catch_amalgamated.hpp>
#include <numbers>

#include "floqstab/drives.hpp"

using namespace floqstab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("drive fields") {
  const double B0 = 1.3, w = 0.7, T = 2 * pi / w;
  const auto c = DriveProtocol::circular(B0, w);
  CHECK(c.period() == T);
  CHECK((c.field(0.0) - Field(0, 0, B0)).norm() < 1e-15);
  CHECK((c.field(T / 4) - Field(B0, 0, 0)).norm() < 1e-12);
  for (double t : {0.1, 1.7, 5.3}) {
    CHECK_THAT(c.field(t).norm(), WithinRel(B0, 1e-14));
    CHECK((c.field(t + 3 * T) - c.field(t)).norm() < 1e-12);
  }

  // semicircle: B_x clipped to the upper half cycle, lower state |g> at t = 0
  const auto s = DriveProtocol::semicircle(B0, w);
  CHECK((s.field(3 * T / 4) - Field(0, 0, 0)).norm() < 1e-12);
  CHECK((s.field(T / 4) - Field(B0, 0, 0)).norm() < 1e-12);
  CHECK(s.field(0.0)(2) == B0);

  const auto e = DriveProtocol::elliptical(2.0, 0.5, w);
  CHECK((e.field(T / 4) - Field(2.0, 0, 0)).norm() < 1e-12);
  CHECK((e.field(0) - Field(0, 0, 0.5)).norm() < 1e-15);
  CHECK(e.max_field() == 2.0);

  // equal elliptical amplitudes reduce to the circular drive
  const auto ec = DriveProtocol::elliptical(B0, B0, w);
  for (double t : {0.3, 2.2}) CHECK((ec.field(t) - c.field(t)).norm() < 1e-15);

  CHECK_THROWS_AS(DriveProtocol::circular(1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(DriveProtocol::circular(1.0, -1.0), ParameterError);
  CHECK(to_string(DriveProtocol::Kind::Semicircle) == "semicircle");
}

TEST_CASE("system hamiltonian structure") {
  const SystemModel m(DriveProtocol::circular(1.0, 0.5), {{0.8, 0.05, 0.05, 3}}, {0.01, 0.02});
  CHECK(m.dim() == 8);
  for (double t : {0.0, 0.4, 3.1}) CHECK(m.hamiltonian(t).is_hermitian(1e-14));

  // explicit construction from kron products
  const auto q = qubit_ops<>();
  const auto b = boson_ops<>(3);
  const double t = 0.9;
  const Field B = m.drive().field(t);
  const MatrixC I4 = MatrixC::Identity(4, 4), I2 = MatrixC::Identity(2, 2);
  const MatrixC hq = 0.5 * (B(0) * q.sx.matrix() + B(1) * q.sy.matrix() + B(2) * q.sz.matrix());
  MatrixC h = kron(hq, I4) + 0.8 * kron(I2, b.n.matrix());
  const MatrixC jc = kron(q.sm.matrix(), b.adag.matrix());
  h += 0.05 * (jc + jc.adjoint());
  CHECK((m.hamiltonian(t).matrix() - h).norm() < 1e-14);
  CHECK((hamiltonian(m, t).matrix() - h).norm() < 1e-14);
}

TEST_CASE("spectral spread bounds the instantaneous spectrum") {
  const SystemModel m(DriveProtocol::semicircle(2.0, 0.3), {{1.1, 0.2, 0, 4}, {-0.6, 0.1, 0, 2}});
  for (int k = 0; k < 20; ++k) {
    const double t = 0.37 * k;
    Eigen::SelfAdjointEigenSolver<MatrixC> es(m.hamiltonian(t).matrix());
    const auto& ev = es.eigenvalues();
    CHECK(ev.maxCoeff() - ev.minCoeff() <= m.spectral_spread(true) + 1e-12);
  }
  CHECK(m.spectral_spread(false) < m.spectral_spread(true));
}

TEST_CASE("jaynes-cummings coupling conserves excitations for a z field") {
  const SystemModel m(DriveProtocol::constant(Field(0, 0, 1.0), 1.0), {{0.9, 0.1, 0, 4}});
  const auto q = qubit_ops<>();
  const auto N = embed(boson_ops<>(4).n, 1, m.layout()) +
                 0.5 * (embed(q.sz, 0, m.layout()) + Operator<>::identity(m.layout()));
  CHECK(commutator(m.hamiltonian(0.0), N).matrix().norm() < 1e-13);
}

TEST_CASE("jump operators") {
  const SystemModel m(DriveProtocol::circular(1.0, 1.0), {{1.0, 0.05, 0.04, 2}}, {0.01, 0.02});
  const auto j = jump_operators(m);
  REQUIRE(j.size() == 3);
  const auto b = boson_ops<>(2);
  const auto q = qubit_ops<>();
  CHECK((j[0].matrix() - std::sqrt(0.04) * embed(b.a, 1, m.layout()).matrix()).norm() < 1e-15);
  CHECK((j[1].matrix() - std::sqrt(0.01) * embed(q.sm, 0, m.layout()).matrix()).norm() < 1e-15);
  CHECK((j[2].matrix() - std::sqrt(0.01) * embed(q.sz, 0, m.layout()).matrix()).norm() < 1e-15);
  CHECK(m.dissipative());
  CHECK_FALSE(m.closed().dissipative());
  CHECK(m.qubit_only().dim() == 2);
  // zero-rate channels are dropped
  const SystemModel quiet(DriveProtocol::circular(1.0, 1.0), {{1.0, 0.05, 0.0, 2}});
  CHECK(jump_operators(quiet).empty());
  CHECK_THROWS_AS(SystemModel(DriveProtocol::circular(1, 1), {{1.0, 0.1, -0.1, 2}}),
                  ParameterError);
}

TEST_CASE("parameter hierarchy warnings") {
  const SystemModel good(DriveProtocol::circular(1, 1), {{1.0, 0.05, 0.05, 3}}, {0.0025, 0});
  CHECK(good.validate().empty());
  const SystemModel bad(DriveProtocol::circular(1, 1), {{0.1, 0.05, 0.2, 3}}, {0.3, 0});
  CHECK(bad.validate().size() == 3);
}
