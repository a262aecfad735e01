#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "floqstab/errors.hpp"

namespace floqstab {

using Complex = std::complex<double>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixC = DenseMatrix<Complex>;
using VectorC = DenseVector<Complex>;

struct Factor {
  enum class Kind { Qubit, Boson };
  Kind kind = Kind::Qubit;
  int truncation = 1;  // n_max, bosons only

  static Factor qubit() { return {Kind::Qubit, 1}; }
  static Factor boson(int n_max);
  int dim() const { return kind == Kind::Qubit ? 2 : truncation + 1; }
  bool operator==(const Factor&) const = default;
};

// Tensor-product structure. Basis index is factor-major with the last factor
// running fastest, i.e. the ordering produced by kron(A0, kron(A1, ...)).
class SpaceLayout {
 public:
  SpaceLayout() = default;
  explicit SpaceLayout(std::vector<Factor> factors);

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }
  int factor_dim(std::size_t i) const { return factors_.at(i).dim(); }
  int total_dim() const { return total_dim_; }

  int index(std::span<const int> levels) const;
  std::vector<int> levels(int index) const;

  bool operator==(const SpaceLayout&) const = default;

 private:
  std::vector<Factor> factors_;
  int total_dim_ = 1;
};

template <typename Scalar = Complex>
class Operator {
 public:
  using Matrix = DenseMatrix<Scalar>;

  Operator() = default;
  Operator(SpaceLayout layout, Matrix matrix)
      : layout_(std::move(layout)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != layout_.total_dim() || matrix_.cols() != layout_.total_dim())
      throw DimensionError("operator matrix is " + std::to_string(matrix_.rows()) + "x" +
                           std::to_string(matrix_.cols()) + ", layout needs " +
                           std::to_string(layout_.total_dim()));
  }

  static Operator identity(const SpaceLayout& layout) {
    return {layout, Matrix::Identity(layout.total_dim(), layout.total_dim())};
  }
  static Operator zero(const SpaceLayout& layout) {
    return {layout, Matrix::Zero(layout.total_dim(), layout.total_dim())};
  }

  const SpaceLayout& layout() const { return layout_; }
  const Matrix& matrix() const { return matrix_; }
  int dim() const { return layout_.total_dim(); }

  Operator adjoint() const { return {layout_, matrix_.adjoint()}; }

  // relative Frobenius defect of H - H^dagger
  double hermiticity_defect() const {
    const double n = matrix_.norm();
    return n == 0.0 ? 0.0 : (matrix_ - matrix_.adjoint()).norm() / n;
  }
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }

  Operator& operator+=(const Operator& o) { check(o); matrix_ += o.matrix_; return *this; }
  Operator& operator-=(const Operator& o) { check(o); matrix_ -= o.matrix_; return *this; }
  Operator& operator*=(Scalar s) { matrix_ *= s; return *this; }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, Scalar s) { return a *= s; }
  friend Operator operator*(Scalar s, Operator a) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b) {
    a.check(b);
    return {a.layout_, a.matrix_ * b.matrix_};
  }
  friend DenseVector<Scalar> operator*(const Operator& a, const DenseVector<Scalar>& v) {
    if (v.size() != a.dim()) throw DimensionError("state vector length does not match operator");
    return a.matrix_ * v;
  }

 private:
  void check(const Operator& o) const {
    if (!(layout_ == o.layout_)) throw DimensionError("operators live on different layouts");
  }

  SpaceLayout layout_;
  Matrix matrix_;
};

template <typename Scalar>
Operator<Scalar> commutator(const Operator<Scalar>& a, const Operator<Scalar>& b) {
  return a * b - b * a;
}

template <typename Derived1, typename Derived2>
auto kron(const Eigen::MatrixBase<Derived1>& a, const Eigen::MatrixBase<Derived2>& b) {
  using Scalar = typename Derived1::Scalar;
  DenseMatrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// identity (x) ... (x) op (x) ... (x) identity with op on factor_index
template <typename Scalar>
Operator<Scalar> embed(const Operator<Scalar>& op, std::size_t factor_index,
                       const SpaceLayout& layout) {
  if (factor_index >= layout.size())
    throw DimensionError("factor index " + std::to_string(factor_index) +
                         " out of range for a layout with " + std::to_string(layout.size()) +
                         " factors");
  const int d = layout.factor_dim(factor_index);
  if (op.dim() != d)
    throw DimensionError("operator of dimension " + std::to_string(op.dim()) +
                         " cannot act on factor of dimension " + std::to_string(d));
  int left = 1, right = 1;
  for (std::size_t i = 0; i < factor_index; ++i) left *= layout.factor_dim(i);
  for (std::size_t i = factor_index + 1; i < layout.size(); ++i) right *= layout.factor_dim(i);
  using M = DenseMatrix<Scalar>;
  M out = kron(M::Identity(left, left).eval(), kron(op.matrix(), M::Identity(right, right).eval()));
  return {layout, std::move(out)};
}

template <typename Scalar = Complex>
struct QubitOps {
  Operator<Scalar> sx, sy, sz, sp, sm;
};

template <typename Scalar = Complex>
struct BosonOps {
  Operator<Scalar> a, adag, n;
};

// Basis (g, e) = (0, 1); sigma_z|e> = +|e>, sigma_-|e> = |g>.
template <typename Scalar = Complex>
QubitOps<Scalar> qubit_ops() {
  using M = DenseMatrix<Scalar>;
  const SpaceLayout q({Factor::qubit()});
  const Scalar i(0, 1);
  M sx(2, 2), sy(2, 2), sz(2, 2), sp(2, 2), sm(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, i, -i, 0;
  sz << -1, 0, 0, 1;
  sp << 0, 0, 1, 0;
  sm << 0, 1, 0, 0;
  return {{q, sx}, {q, sy}, {q, sz}, {q, sp}, {q, sm}};
}

// [a, a^dagger] = 1 except the (n_max, n_max) entry, which is -n_max.
template <typename Scalar = Complex>
BosonOps<Scalar> boson_ops(int n_max) {
  using M = DenseMatrix<Scalar>;
  const SpaceLayout b({Factor::boson(n_max)});
  M a = M::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  M adag = a.adjoint();
  M n = adag * a;
  return {{b, a}, {b, adag}, {b, n}};
}

// |levels> in the layout's computational basis
VectorC basis_state(const SpaceLayout& layout, std::span<const int> levels);

}  // namespace floqstab
