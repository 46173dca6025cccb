#pragma once

// Finite-dimensional complex linear algebra for pure and mixed states.
//
// Tensor factors are ordered row-major: in a product space with dims
// [d0, d1, ..., dk] the first factor varies slowest, so the amplitude of
// |i0 i1 ... ik> sits at ((i0*d1 + i1)*d2 + ...)*dk + ik.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "nlqm/errors.hpp"

namespace nlqm {

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;
using Dims = std::vector<Index>;

using VectorXc = CVector<double>;
using MatrixXc = CMatrix<double>;

namespace tolerance {
inline constexpr double hermitian = 1e-12;
inline constexpr double positivity = 1e-10;
inline constexpr double unitary = 1e-12;
inline constexpr double imaginary_residual = 1e-10;
}  // namespace tolerance

inline Index product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

/// max_ij |M_ij - conj(M_ji)|
template <typename Derived>
auto hermiticity_residual(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// max_ij |(U^dagger U - 1)_ij|
template <typename Derived>
auto unitarity_residual(const Eigen::MatrixBase<Derived>& u) {
  using Plain = typename Derived::PlainObject;
  return (u.adjoint() * u - Plain::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

namespace detail {

inline void check_dims(const Dims& dims, Index size, const char* what) {
  if (dims.empty()) throw DimensionError(std::string(what) + ": empty factor list");
  for (auto d : dims)
    if (d <= 0) throw DimensionError(std::string(what) + ": factor dimensions must be positive");
  if (product(dims) != size)
    throw DimensionError(std::string(what) + ": product of factor dimensions " + std::to_string(product(dims)) +
                         " does not match size " + std::to_string(size));
}

inline void check_slot(const Dims& dims, std::size_t slot) {
  if (slot >= dims.size())
    throw DimensionError("factor index " + std::to_string(slot) + " out of range for " +
                         std::to_string(dims.size()) + " factors");
}

struct SlotLayout {
  Index left, mid, right;
};

inline SlotLayout layout(const Dims& dims, std::size_t slot) {
  check_slot(dims, slot);
  Index left = 1, right = 1;
  for (std::size_t i = 0; i < slot; ++i) left *= dims[i];
  for (std::size_t i = slot + 1; i < dims.size(); ++i) right *= dims[i];
  return {left, dims[slot], right};
}

}  // namespace detail

/// Pure state: amplitudes plus tensor-factor dimensions. Immutable after construction.
template <typename Scalar>
class BasicStateVector {
 public:
  using Vector = CVector<Scalar>;

  explicit BasicStateVector(Vector amplitudes) : BasicStateVector(amplitudes, Dims{amplitudes.size()}) {}

  BasicStateVector(Vector amplitudes, Dims dims) : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)) {
    detail::check_dims(dims_, amplitudes_.size(), "StateVector");
    if (!amplitudes_.allFinite()) throw InvalidStateError("StateVector: non-finite amplitude");
  }

  const Vector& amplitudes() const noexcept { return amplitudes_; }
  const Dims& dims() const noexcept { return dims_; }
  Index size() const noexcept { return amplitudes_.size(); }
  Scalar squared_norm() const { return amplitudes_.squaredNorm(); }
  Scalar norm() const { return amplitudes_.norm(); }
  std::complex<Scalar> operator[](Index i) const { return amplitudes_(i); }

  BasicStateVector normalized() const {
    require_nonzero("normalized");
    return BasicStateVector(amplitudes_ / norm(), dims_);
  }

  /// Throws unless <psi|psi> > 0; states entering dynamics or spectra must pass this.
  void require_nonzero(const char* where) const {
    if (!(squared_norm() > Scalar(0))) throw InvalidStateError(std::string(where) + ": zero state vector");
  }

 private:
  Vector amplitudes_;
  Dims dims_;
};

/// Hermitian matrix, validated on construction (max |M - M^dagger| <= 1e-12).
template <typename Scalar>
class BasicHermitianOperator {
 public:
  using Matrix = CMatrix<Scalar>;

  explicit BasicHermitianOperator(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw DimensionError("HermitianOperator: matrix is not square");
    if (!entries_.allFinite()) throw InvalidStateError("HermitianOperator: non-finite entry");
    const double r = static_cast<double>(hermiticity_residual(entries_));
    if (r > tolerance::hermitian) throw NotHermitianError("HermitianOperator", r);
  }

  /// Takes (M + M^dagger)/2 after checking the residual against `tol`.
  static BasicHermitianOperator symmetrized(const Matrix& m, double tol) {
    const double r = static_cast<double>(hermiticity_residual(m));
    if (!(r <= tol)) throw NotHermitianError("HermitianOperator::symmetrized", r);
    return BasicHermitianOperator(Matrix((m + m.adjoint()) / Scalar(2)));
  }

  const Matrix& matrix() const noexcept { return entries_; }
  Index dim() const noexcept { return entries_.rows(); }

 private:
  Matrix entries_;
};

/// Density matrix with tensor-factor dimensions. Hermitian, real positive trace,
/// smallest eigenvalue >= -1e-10.
template <typename Scalar>
class BasicDensityMatrix {
 public:
  using Matrix = CMatrix<Scalar>;

  explicit BasicDensityMatrix(Matrix entries) : BasicDensityMatrix(entries, Dims{entries.rows()}) {}

  BasicDensityMatrix(Matrix entries, Dims dims) : entries_(std::move(entries)), dims_(std::move(dims)) {
    if (entries_.rows() != entries_.cols()) throw DimensionError("DensityMatrix: matrix is not square");
    detail::check_dims(dims_, entries_.rows(), "DensityMatrix");
    if (!entries_.allFinite()) throw InvalidStateError("DensityMatrix: non-finite entry");
    const double r = static_cast<double>(hermiticity_residual(entries_));
    if (r > tolerance::hermitian) throw NotHermitianError("DensityMatrix", r);
    const auto tr = entries_.trace();
    if (!(tr.real() > Scalar(0)) || std::abs(tr.imag()) > tolerance::hermitian)
      throw InvalidStateError("DensityMatrix: trace must be real and positive");
    Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tolerance::positivity)
      throw InvalidStateError("DensityMatrix: negative eigenvalue " + std::to_string(double(es.eigenvalues().minCoeff())));
  }

  static BasicDensityMatrix projector(const BasicStateVector<Scalar>& psi) {
    psi.require_nonzero("DensityMatrix::projector");
    Matrix m = psi.amplitudes() * psi.amplitudes().adjoint();
    return BasicDensityMatrix((m + m.adjoint()) / Scalar(2), psi.dims());
  }

  const Matrix& matrix() const noexcept { return entries_; }
  const Dims& dims() const noexcept { return dims_; }
  Index size() const noexcept { return entries_.rows(); }
  Scalar trace() const { return entries_.trace().real(); }
  Scalar purity() const { return (entries_ * entries_).trace().real(); }

 private:
  Matrix entries_;
  Dims dims_;
};

using StateVector = BasicStateVector<double>;
using DensityMatrix = BasicDensityMatrix<double>;
using HermitianOperator = BasicHermitianOperator<double>;

// ---------------------------------------------------------------------------
// Standard matrices

template <typename Scalar = double>
CMatrix<Scalar> pauli(int k) {
  using C = std::complex<Scalar>;
  CMatrix<Scalar> m(2, 2);
  switch (k) {
    case 0: m << C(1), C(0), C(0), C(1); break;
    case 1: m << C(0), C(1), C(1), C(0); break;
    case 2: m << C(0), C(0, -1), C(0, 1), C(0); break;
    case 3: m << C(1), C(0), C(0), C(-1); break;
    default: throw DimensionError("pauli: index must be 0..3");
  }
  return m;
}

/// [[1, 1], [1, -1]] / sqrt(2)
template <typename Scalar = double>
CMatrix<Scalar> hadamard() {
  CMatrix<Scalar> h(2, 2);
  const Scalar s = Scalar(1) / std::sqrt(Scalar(2));
  h << s, s, s, -s;
  return h;
}

template <typename Scalar>
void require_unitary(const CMatrix<Scalar>& u, const char* where) {
  if (u.rows() != u.cols()) throw DimensionError(std::string(where) + ": unitary must be square");
  const double r = static_cast<double>(unitarity_residual(u));
  if (!(r <= tolerance::unitary)) throw NotUnitaryError(where, r);
}

/// 1 (x) ... (x) op (x) ... (x) 1 with `op` on factor `slot`.
template <typename Scalar>
CMatrix<Scalar> embed_operator(const CMatrix<Scalar>& op, const Dims& dims, std::size_t slot) {
  const auto [left, mid, right] = detail::layout(dims, slot);
  if (op.rows() != mid || op.cols() != mid)
    throw DimensionError("embed_operator: operator dimension does not match factor " + std::to_string(slot));
  const Index n = left * mid * right;
  CMatrix<Scalar> out = CMatrix<Scalar>::Zero(n, n);
  for (Index l = 0; l < left; ++l)
    for (Index r = 0; r < right; ++r)
      for (Index a = 0; a < mid; ++a)
        for (Index b = 0; b < mid; ++b) out((l * mid + a) * right + r, (l * mid + b) * right + r) = op(a, b);
  return out;
}

/// Applies `op` to factor `slot` of a vector laid out with `dims` (no unitarity check).
template <typename Scalar>
CVector<Scalar> apply_on_factor(const CVector<Scalar>& v, const CMatrix<Scalar>& op, const Dims& dims,
                                std::size_t slot) {
  const auto [left, mid, right] = detail::layout(dims, slot);
  if (op.rows() != mid || op.cols() != mid)
    throw DimensionError("apply_on_factor: operator dimension does not match factor " + std::to_string(slot));
  CVector<Scalar> out = CVector<Scalar>::Zero(v.size());
  for (Index l = 0; l < left; ++l)
    for (Index r = 0; r < right; ++r)
      for (Index a = 0; a < mid; ++a) {
        std::complex<Scalar> acc(0);
        for (Index b = 0; b < mid; ++b) acc += op(a, b) * v((l * mid + b) * right + r);
        out((l * mid + a) * right + r) = acc;
      }
  return out;
}

// ---------------------------------------------------------------------------
// Operations

template <typename Scalar>
BasicStateVector<Scalar> tensor_state(const BasicStateVector<Scalar>& a, const BasicStateVector<Scalar>& b) {
  CVector<Scalar> out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b.amplitudes();
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return BasicStateVector<Scalar>(std::move(out), std::move(dims));
}

/// Raw reduced matrix of factor `keep` (no validation of the input).
template <typename Scalar>
CMatrix<Scalar> reduce_matrix(const CMatrix<Scalar>& rho, const Dims& dims, std::size_t keep) {
  const auto [left, mid, right] = detail::layout(dims, keep);
  CMatrix<Scalar> out = CMatrix<Scalar>::Zero(mid, mid);
  for (Index a = 0; a < mid; ++a)
    for (Index b = 0; b < mid; ++b) {
      std::complex<Scalar> acc(0);
      for (Index l = 0; l < left; ++l)
        for (Index r = 0; r < right; ++r) acc += rho((l * mid + a) * right + r, (l * mid + b) * right + r);
      out(a, b) = acc;
    }
  return out;
}

/// Reduced matrix of factor `keep` for the pure state `psi`, i.e. Tr_rest |psi><psi|.
template <typename Scalar>
CMatrix<Scalar> reduce_pure(const CVector<Scalar>& psi, const Dims& dims, std::size_t keep) {
  const auto [left, mid, right] = detail::layout(dims, keep);
  CMatrix<Scalar> out = CMatrix<Scalar>::Zero(mid, mid);
  for (Index l = 0; l < left; ++l)
    for (Index r = 0; r < right; ++r)
      for (Index a = 0; a < mid; ++a) {
        const auto pa = psi((l * mid + a) * right + r);
        for (Index b = 0; b < mid; ++b) out(a, b) += pa * std::conj(psi((l * mid + b) * right + r));
      }
  return out;
}

template <typename Scalar>
BasicDensityMatrix<Scalar> partial_trace(const BasicDensityMatrix<Scalar>& rho, std::size_t keep) {
  if (rho.dims().size() < 2) throw DimensionError("partial_trace: need at least two tensor factors");
  CMatrix<Scalar> out = reduce_matrix(rho.matrix(), rho.dims(), keep);
  out = (out + out.adjoint()).eval() / Scalar(2);
  return BasicDensityMatrix<Scalar>(std::move(out), Dims{rho.dims()[keep]});
}

template <typename Scalar>
BasicDensityMatrix<Scalar> partial_trace(const BasicStateVector<Scalar>& psi, std::size_t keep) {
  if (psi.dims().size() < 2) throw DimensionError("partial_trace: need at least two tensor factors");
  psi.require_nonzero("partial_trace");
  CMatrix<Scalar> out = reduce_pure(psi.amplitudes(), psi.dims(), keep);
  out = (out + out.adjoint()).eval() / Scalar(2);
  return BasicDensityMatrix<Scalar>(std::move(out), Dims{psi.dims()[keep]});
}

template <typename Scalar>
BasicStateVector<Scalar> rotate_subsystem(const BasicStateVector<Scalar>& psi, const CMatrix<Scalar>& u,
                                          std::size_t slot) {
  require_unitary(u, "rotate_subsystem");
  return BasicStateVector<Scalar>(apply_on_factor(psi.amplitudes(), u, psi.dims(), slot), psi.dims());
}

template <typename Scalar>
BasicDensityMatrix<Scalar> rotate_subsystem(const BasicDensityMatrix<Scalar>& rho, const CMatrix<Scalar>& u,
                                            std::size_t slot) {
  require_unitary(u, "rotate_subsystem");
  const CMatrix<Scalar> full = embed_operator(u, rho.dims(), slot);
  CMatrix<Scalar> out = full * rho.matrix() * full.adjoint();
  out = (out + out.adjoint()).eval() / Scalar(2);
  return BasicDensityMatrix<Scalar>(std::move(out), rho.dims());
}

/// <psi|A psi> / <psi|psi>
template <typename Scalar>
Scalar expectation(const BasicStateVector<Scalar>& psi, const BasicHermitianOperator<Scalar>& op) {
  if (op.dim() != psi.size()) throw DimensionError("expectation: operator/state dimension mismatch");
  psi.require_nonzero("expectation");
  const std::complex<Scalar> v = psi.amplitudes().dot(op.matrix() * psi.amplitudes()) / psi.squared_norm();
  if (std::abs(v.imag()) > tolerance::imaginary_residual)
    throw NotHermitianError("expectation: complex average", static_cast<double>(std::abs(v.imag())));
  return v.real();
}

/// Tr(rho A) / Tr(rho)
template <typename Scalar>
Scalar expectation(const BasicDensityMatrix<Scalar>& rho, const BasicHermitianOperator<Scalar>& op) {
  if (op.dim() != rho.size()) throw DimensionError("expectation: operator/density dimension mismatch");
  const std::complex<Scalar> v = (rho.matrix() * op.matrix()).trace() / rho.trace();
  if (std::abs(v.imag()) > tolerance::imaginary_residual)
    throw NotHermitianError("expectation: complex average", static_cast<double>(std::abs(v.imag())));
  return v.real();
}

/// Multiplies by a global phase so the largest-modulus component is real and non-negative.
template <typename Scalar>
CVector<Scalar> gauge_fixed(const CVector<Scalar>& v) {
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const auto a = v(imax);
  if (std::abs(a) == Scalar(0)) return v;
  return v * (std::abs(a) / a);
}

/// |<a|b>|^2 / (<a|a><b|b>)
template <typename Scalar>
Scalar fidelity(const CVector<Scalar>& a, const CVector<Scalar>& b) {
  return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

}  // namespace nlqm
