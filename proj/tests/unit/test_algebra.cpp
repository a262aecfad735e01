#include <catch_amalgamated.hpp>

#include "floqstab/algebra.hpp"

using namespace floqstab;
using Catch::Matchers::WithinAbs;

TEST_CASE("pauli algebra in the (g, e) basis") {
  const auto q = qubit_ops<>();
  const Complex i(0, 1);
  const auto I = Operator<>::identity(q.sx.layout());
  // [sx, sy] = 2i sz and sx^2 = 1
  CHECK((commutator(q.sx, q.sy) - 2.0 * i * q.sz).matrix().norm() < 1e-15);
  CHECK(((q.sx * q.sx) - I).matrix().norm() < 1e-15);
  // sigma_- lowers e to g, sigma_z|e> = +|e>
  const VectorC e = basis_state(q.sx.layout(), std::vector<int>{1});
  const VectorC g = basis_state(q.sx.layout(), std::vector<int>{0});
  CHECK((q.sm * e - g).norm() < 1e-15);
  CHECK((q.sz * e - e).norm() < 1e-15);
  CHECK((q.sz * g + g).norm() < 1e-15);
  // sp = sm^dagger, sx = sp + sm
  CHECK((q.sp.matrix() - q.sm.matrix().adjoint()).norm() < 1e-15);
  CHECK((q.sx - q.sp - q.sm).matrix().norm() < 1e-15);
  for (const auto* op : {&q.sx, &q.sy, &q.sz}) CHECK(op->is_hermitian());
}

TEST_CASE("truncated boson operators") {
  const int n = 5;
  const auto b = boson_ops<>(n);
  const MatrixC comm = (b.a * b.adag - b.adag * b.a).matrix();
  for (int k = 0; k < n; ++k) CHECK_THAT(comm(k, k).real(), WithinAbs(1.0, 1e-14));
  CHECK_THAT(comm(n, n).real(), WithinAbs(-double(n), 1e-14));
  for (int k = 0; k <= n; ++k) CHECK_THAT(b.n.matrix()(k, k).real(), WithinAbs(k, 1e-14));
  CHECK(b.n.is_hermitian());
  CHECK_THROWS_AS(Factor::boson(0), ParameterError);
}

TEST_CASE("layout indexing runs the last factor fastest") {
  const SpaceLayout l({Factor::qubit(), Factor::boson(3), Factor::boson(2)});
  CHECK(l.total_dim() == 2 * 4 * 3);
  const std::vector<int> lv{1, 2, 1};
  CHECK(l.index(lv) == (1 * 4 + 2) * 3 + 1);
  CHECK(l.levels(l.index(lv)) == lv);
  for (int i = 0; i < l.total_dim(); ++i) CHECK(l.index(l.levels(i)) == i);
  CHECK_THROWS_AS(l.index(std::vector<int>{0, 4, 0}), DimensionError);
  CHECK_THROWS_AS(l.index(std::vector<int>{0, 0}), DimensionError);
}

TEST_CASE("embedding matches an explicit Kronecker product") {
  const SpaceLayout l({Factor::qubit(), Factor::boson(2)});
  const auto q = qubit_ops<>();
  const auto b = boson_ops<>(2);
  const MatrixC expect = kron(q.sm.matrix(), MatrixC::Identity(3, 3).eval());
  CHECK((embed(q.sm, 0, l).matrix() - expect).norm() < 1e-15);
  const MatrixC expect_a = kron(MatrixC::Identity(2, 2).eval(), b.a.matrix());
  CHECK((embed(b.a, 1, l).matrix() - expect_a).norm() < 1e-15);
  // operators on different factors commute
  CHECK(commutator(embed(q.sx, 0, l), embed(b.n, 1, l)).matrix().norm() < 1e-14);
  CHECK_THROWS_AS(embed(q.sx, 1, l), DimensionError);
  CHECK_THROWS_AS(embed(q.sx, 2, l), DimensionError);
}

TEST_CASE("operators reject mismatched shapes") {
  const SpaceLayout a({Factor::qubit()});
  const SpaceLayout b({Factor::boson(1)});
  CHECK_THROWS_AS(Operator<>(a, MatrixC::Zero(3, 3)), DimensionError);
  CHECK_THROWS_AS(Operator<>::identity(a) + Operator<>::identity(b), DimensionError);
  CHECK_THROWS_AS(Operator<>::identity(a) * VectorC::Zero(3), DimensionError);
}

TEST_CASE("operators are templated on the scalar") {
  const auto q = qubit_ops<std::complex<float>>();
  CHECK((q.sx * q.sx).matrix().isIdentity(1e-6f));
  const auto b = boson_ops<double>(3);
  CHECK(b.a.matrix()(0, 1) == 1.0);
}

TEST_CASE("warnings go through the installed handler") {
  std::vector<std::string> seen;
  set_warning_handler([&](const std::string& m) { seen.push_back(m); });
  warn("hello");
  set_warning_handler(nullptr);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0] == "hello");
}
