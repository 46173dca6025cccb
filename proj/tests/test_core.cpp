#include <doctest.h>

#include "nlqm/core.hpp"
#include "support.hpp"

using namespace nlqm;
using testing::Sampler;

namespace {

const std::complex<double> I(0, 1);

// Kronecker product written out directly as an independent reference.
MatrixXc kron(const MatrixXc& a, const MatrixXc& b) {
  MatrixXc out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

TEST_CASE("pauli matrices multiply as s1 s2 = i s3 and square to one") {
  CHECK(testing::max_abs(pauli(1) * pauli(2) - I * pauli(3)) == 0.0);
  CHECK(testing::max_abs(pauli(2) * pauli(3) - I * pauli(1)) == 0.0);
  for (int k = 1; k <= 3; ++k) CHECK(testing::max_abs(pauli(k) * pauli(k) - pauli(0)) == 0.0);
  CHECK_THROWS_AS(pauli(4), DimensionError);
}

TEST_CASE("state vectors validate their factor dimensions") {
  CHECK_THROWS_AS(StateVector(VectorXc::Ones(4), Dims{2, 3}), DimensionError);
  CHECK_THROWS_AS(StateVector(VectorXc::Ones(4), Dims{}), DimensionError);
  VectorXc bad = VectorXc::Ones(2);
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(StateVector{bad}, InvalidStateError);
  const StateVector zero(VectorXc::Zero(2));
  CHECK_THROWS_AS(zero.normalized(), InvalidStateError);
  CHECK(StateVector(VectorXc::Ones(2)).normalized().norm() == doctest::Approx(1.0));
}

TEST_CASE("hermitian operators and density matrices reject invalid input") {
  MatrixXc m = pauli(1);
  m(0, 1) += 1e-9;
  CHECK_THROWS_AS(HermitianOperator{m}, NotHermitianError);
  CHECK_NOTHROW(HermitianOperator::symmetrized(m, 1e-8));
  CHECK_THROWS_AS(HermitianOperator::symmetrized(m, 1e-10), NotHermitianError);

  MatrixXc neg = MatrixXc::Zero(2, 2);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  CHECK_THROWS_AS(DensityMatrix{neg}, InvalidStateError);
  CHECK_THROWS_AS(DensityMatrix{MatrixXc(MatrixXc::Zero(2, 2))}, InvalidStateError);
  CHECK_THROWS_AS(DensityMatrix(MatrixXc::Identity(4, 4) / 4.0, Dims{2, 3}), DimensionError);
}

TEST_CASE("embed_operator agrees with an explicit Kronecker product") {
  Sampler s(11);
  const MatrixXc a = s.hermitian(2), b = s.hermitian(3), c = s.hermitian(2);
  const Dims dims{2, 3, 2};
  CHECK(testing::max_abs(embed_operator(a, dims, 0) - kron(kron(a, MatrixXc::Identity(3, 3)), MatrixXc::Identity(2, 2))) <
        1e-15);
  CHECK(testing::max_abs(embed_operator(b, dims, 1) - kron(kron(MatrixXc::Identity(2, 2), b), MatrixXc::Identity(2, 2))) <
        1e-15);
  CHECK(testing::max_abs(embed_operator(c, dims, 2) - kron(MatrixXc::Identity(6, 6), c)) < 1e-15);
  const VectorXc v = s.state(12);
  CHECK((apply_on_factor(v, b, dims, 1) - embed_operator(b, dims, 1) * v).norm() < 1e-13);
  CHECK_THROWS_AS(embed_operator(a, dims, 3), DimensionError);
  CHECK_THROWS_AS(embed_operator(a, dims, 1), DimensionError);
}

TEST_CASE("tensor then partial trace recovers each pure factor") {
  Sampler s(7);
  for (int trial = 0; trial < 50; ++trial) {
    const StateVector a(s.unit_state(2)), b(s.unit_state(3));
    const StateVector ab = tensor_state(a, b);
    CHECK(ab.dims() == Dims{2, 3});
    const DensityMatrix ra = partial_trace(ab, 0), rb = partial_trace(ab, 1);
    CHECK(testing::max_abs(ra.matrix() - DensityMatrix::projector(a).matrix()) < 1e-12);
    CHECK(testing::max_abs(rb.matrix() - DensityMatrix::projector(b).matrix()) < 1e-12);
    CHECK(ra.purity() == doctest::Approx(1.0).epsilon(1e-12));
    // The density-matrix route gives the same result.
    const DensityMatrix full = DensityMatrix::projector(ab);
    CHECK(testing::max_abs(partial_trace(full, 1).matrix() - rb.matrix()) < 1e-12);
  }
}

TEST_CASE("the singlet has maximally mixed marginals") {
  VectorXc v = VectorXc::Zero(4);
  v(1) = 1 / std::sqrt(2.0);
  v(2) = -1 / std::sqrt(2.0);
  const StateVector singlet(v, {2, 2});
  for (std::size_t k : {0u, 1u}) {
    const DensityMatrix r = partial_trace(singlet, k);
    CHECK(testing::max_abs(r.matrix() - MatrixXc::Identity(2, 2) / 2.0) < 1e-15);
    CHECK(r.purity() == doctest::Approx(0.5));
  }
}

TEST_CASE("a local unitary on one factor leaves the other marginal unchanged") {
  Sampler s(3);
  const StateVector psi(s.unit_state(6), {2, 3});
  const MatrixXc u = (I * s.hermitian(2)).exp();
  const StateVector turned = rotate_subsystem(psi, u, 0);
  CHECK(testing::max_abs(partial_trace(turned, 1).matrix() - partial_trace(psi, 1).matrix()) < 1e-13);
  CHECK(testing::max_abs(partial_trace(turned, 0).matrix() - partial_trace(psi, 0).matrix()) > 1e-3);

  const DensityMatrix rho = DensityMatrix::projector(psi);
  const DensityMatrix rho_turned = rotate_subsystem(rho, u, 0);
  CHECK(testing::max_abs(rho_turned.matrix() - DensityMatrix::projector(turned).matrix()) < 1e-13);

  MatrixXc not_unitary = u;
  not_unitary(0, 0) *= 1.001;
  CHECK_THROWS_AS(rotate_subsystem(psi, not_unitary, 0), NotUnitaryError);
}

TEST_CASE("expectation values of pure and mixed states agree") {
  Sampler s(5);
  const HermitianOperator h(s.hermitian(3));
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector psi(s.state(3));
    const double pure = expectation(psi, h);
    CHECK(expectation(DensityMatrix::projector(psi), h) == doctest::Approx(pure).epsilon(1e-12));
    const StateVector scaled(VectorXc(psi.amplitudes() * std::complex<double>(0.3, 2.0)));
    CHECK(expectation(scaled, h) == doctest::Approx(pure).epsilon(1e-12));
  }
  CHECK_THROWS_AS(expectation(StateVector(VectorXc::Ones(2)), h), DimensionError);
}

TEST_CASE("gauge fixing and fidelity ignore global phases") {
  Sampler s(9);
  const VectorXc v = s.state(4);
  const VectorXc w = v * std::exp(I * 1.234);
  CHECK((gauge_fixed(v) - gauge_fixed(w)).norm() < 1e-14);
  CHECK(fidelity(v, w) == doctest::Approx(1.0));
  VectorXc e0 = VectorXc::Zero(2), e1 = VectorXc::Zero(2);
  e0(0) = 1;
  e1(1) = 1;
  CHECK(fidelity(e0, e1) == 0.0);
}

TEST_CASE("core types work in single precision") {
  using SV = BasicStateVector<float>;
  CVector<float> v(2);
  v << std::complex<float>(3, 0), std::complex<float>(0, 4);
  const SV psi(v);
  CHECK(psi.normalized().norm() == doctest::Approx(1.0f));
  const auto rho = BasicDensityMatrix<float>::projector(psi);
  CHECK(rho.trace() == doctest::Approx(25.0f));
}
