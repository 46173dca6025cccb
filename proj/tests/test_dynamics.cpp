#include <doctest.h>

#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/jacobi_elliptic.hpp>

#include "nlqm/dynamics.hpp"
#include "support.hpp"

using namespace nlqm;
using testing::Sampler;

namespace {

const std::complex<double> I(0, 1);

double max_drift(const std::vector<double>& v) {
  double d = 0;
  for (double x : v) d = std::max(d, std::abs(x - v.front()));
  return d;
}

}  // namespace

TEST_CASE("the step grid ends exactly at t_end") {
  const auto g = step_grid(1.0, 0.3);
  CHECK(g.steps == 4);
  CHECK(g.steps * g.h == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(step_grid(1.0, 0.1).steps == 10);
  CHECK(step_grid(2 * M_PI, 0.01).steps == 629);
}

TEST_CASE("rk4 is fourth order") {
  auto f = [](double t, const Eigen::VectorXd& y) -> Eigen::VectorXd { return -y * std::cos(t); };
  auto run = [&](int n) {
    Eigen::VectorXd y = Eigen::VectorXd::Ones(1);
    const double h = 2.0 / n;
    for (int i = 0; i < n; ++i) y = rk4_step(f, i * h, y, h);
    return std::abs(y(0) - std::exp(-std::sin(2.0)));
  };
  const double ratio = run(50) / run(100);
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("integrated canonical flow matches the exact solution") {
  const std::vector<double> e{0.2, -0.5, 1.0}, eps{0.7, -0.3, 0.4};
  MatrixXc h0 = MatrixXc::Zero(3, 3), k = MatrixXc::Zero(3, 3);
  for (int i = 0; i < 3; ++i) {
    h0(i, i) = e[i];
    k(i, i) = eps[i];
  }
  const HomogeneousObservable h = catalog::power_family(h0, k, 1.0, 2);
  Sampler s(71);
  const StateVector psi0(s.state(3));
  NlsOptions opt;
  opt.hamiltonian_function = h;
  const Trajectory traj = integrate_nls(flow_generator(h), psi0, 10.0, 0.005, opt);
  double err = 0;
  for (std::size_t i = 0; i < traj.size(); i += 100)
    err = std::max(err, (traj.states[i] - canonical_solution(e, eps, psi0, traj.times[i]).amplitudes()).norm());
  CHECK(err < 1e-9);
}

TEST_CASE("norm and Hamiltonian function are conserved over 10^4 steps") {
  Sampler s(72);
  const std::vector<HomogeneousObservable> hs = {
      catalog::canonical(0.0, 1.0, 1.0), catalog::cubic(0.0, 1.0, 0.5),
      catalog::power_family(s.hermitian(3), s.hermitian(3), 0.4, 2),
      catalog::weinberg_lift(catalog::canonical(0.0, 0.5, 0.4), 2, 2, MatrixXc::Identity(2, 2))};
  const std::vector<Index> dims{2, 2, 3, 4};
  for (std::size_t i = 0; i < hs.size(); ++i) {
    CAPTURE(hs[i].label());
    NlsOptions opt;
    opt.hamiltonian_function = hs[i];
    opt.state_stride = 1000;
    const Trajectory traj = integrate_nls(flow_generator(hs[i]), StateVector(s.unit_state(dims[i])), 100.0, 0.01, opt);
    CHECK(traj.times.size() == 10001);
    CHECK(max_drift(traj.recorded.at("norm")) < 1e-7);
    CHECK(max_drift(traj.recorded.at("H")) < 1e-7);
  }
}

TEST_CASE("hessian and rank-two generators give the same flow") {
  const HomogeneousObservable h = catalog::cubic(0.1, 0.9, 0.6);
  VectorXc psi(2);
  psi << 0.6, 0.8 * I;
  const Trajectory a = integrate_nls(flow_generator(h), StateVector(psi), 3.0, 0.01);
  const Trajectory b = integrate_nls(hessian_generator(h), StateVector(psi), 3.0, 0.01);
  CHECK((a.states.back() - b.states.back()).norm() < 1e-7);
}

TEST_CASE("ab_minus_ba is Hermitian and has the linear mean") {
  Sampler s(73);
  const MatrixXc h0 = s.hermitian(3), a = s.hermitian(3), b = s.hermitian(3);
  const auto builder = ab_minus_ba(h0, a, b);
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXc psi = s.unit_state(3);
    const MatrixXc m = builder(psi);
    CHECK(hermiticity_residual(m) < 1e-14);
    CHECK(psi.dot(m * psi).real() == doctest::Approx(psi.dot(h0 * psi).real()).epsilon(1e-12));
  }
}

TEST_CASE("non-Hermitian generators are rejected") {
  MatrixXc m = pauli(1);
  m(0, 1) = 2.0;
  VectorXc psi(2);
  psi << 1, 0;
  CHECK_THROWS_AS(integrate_nls(constant_generator(m), StateVector(psi), 1.0, 0.1), Error);
}

TEST_CASE("an energy-injecting generator trips the drift monitor") {
  const HomogeneousObservable h = catalog::canonical(0, 1, 1.0);
  // Uses the Hamiltonian of a different observable: H is not conserved.
  NlsOptions opt;
  opt.hamiltonian_function = h;
  VectorXc psi(2);
  psi << 0.8, 0.6;
  CHECK_THROWS_AS(integrate_nls(constant_generator(pauli(1)), StateVector(psi), 5.0, 0.01, opt), IntegrationError);
}

TEST_CASE("bloch vector length is conserved without radiation reaction") {
  BlochParams p;
  p.delta = 0.3;
  p.omega = 1.0;
  p.eps = 0.2;
  const BlochTrajectory tr = integrate_bloch(p, {0.0, 0.0, -1.0}, 100.0, 0.01);
  double drift = 0;
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    drift = std::max(drift, std::abs(tr.u[i] * tr.u[i] + tr.v[i] * tr.v[i] + tr.w[i] * tr.w[i] - 1.0));
  CHECK(tr.times.size() == 10001);
  CHECK(drift < 1e-9);
}

TEST_CASE("resonant bloch flopping is -cos(Omega t)") {
  BlochParams p;
  p.omega = 1.3;
  const BlochTrajectory tr = integrate_bloch(p, {}, 20.0, 0.01);
  double err = 0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) err = std::max(err, std::abs(tr.w[i] + std::cos(1.3 * tr.times[i])));
  CHECK(err < 1e-8);
}

TEST_CASE("radiation reaction changes |r|^2 at rate -2 A w v^2") {
  BlochParams p;
  p.a = 0.2;
  p.omega = 0.5;
  p.eps = 0.1;
  const BlochTrajectory tr = integrate_bloch(p, {0.6, 0.0, 0.8}, 20.0, 0.01);
  const double h = tr.times[1] - tr.times[0];
  auto len = [&](std::size_t i) { return tr.u[i] * tr.u[i] + tr.v[i] * tr.v[i] + tr.w[i] * tr.w[i]; };
  double worst = 0;
  for (std::size_t i = 2; i + 2 < tr.times.size(); ++i) {
    const double d = (-len(i + 2) + 8 * len(i + 1) - 8 * len(i - 1) + len(i - 2)) / (12 * h);
    worst = std::max(worst, std::abs(d + 2 * p.a * tr.w[i] * tr.v[i] * tr.v[i]));
  }
  CHECK(worst < 1e-6);
  CHECK(std::abs(len(tr.times.size() - 1) - 1.0) > 1e-3);
}

TEST_CASE("neo-Hamiltonian spin averages follow the rotating-frame bloch equations") {
  BlochParams p;
  p.a = 0.3;
  p.eps = 0.25;
  p.form = BlochForm::rotating_frame;
  const double theta = 0.9, phi = 0.4;
  VectorXc psi(2);
  psi << std::cos(theta / 2), std::exp(I * phi) * std::sin(theta / 2);
  const BlochState r0{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
  NlsOptions opt;
  for (int k = 1; k <= 3; ++k) {
    const MatrixXc sk = pauli(k);
    opt.observers["s" + std::to_string(k)] = [sk](const VectorXc& v) { return v.dot(sk * v).real() / v.squaredNorm(); };
  }
  const Trajectory nls = integrate_nls(neo_hamiltonian(p.a, p.eps, MatrixXc::Zero(2, 2)), StateVector(psi), 20.0, 0.01, opt);
  const BlochTrajectory tr = integrate_bloch(p, r0, 20.0, 0.01);
  double err = 0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    err = std::max(err, std::abs(nls.recorded.at("s1")[i] - tr.u[i]));
    err = std::max(err, std::abs(nls.recorded.at("s2")[i] - tr.v[i]));
    err = std::max(err, std::abs(nls.recorded.at("s3")[i] - tr.w[i]));
  }
  CHECK(err < 1e-6);
}

TEST_CASE("jacobi elliptic functions agree with an independent implementation") {
  for (double k : {0.0, 0.1, 0.5, 0.9, 0.999, 1.0}) {
    for (double u : {-3.7, -0.2, 0.0, 0.5, 1.3, 4.0, 11.0}) {
      CAPTURE(k);
      CAPTURE(u);
      double cn = 0, dn = 0;
      const double sn = boost::math::jacobi_elliptic(k, u, &cn, &dn);
      const JacobiValues v = jacobi_elliptic(u, k);
      CHECK(std::abs(v.sn - sn) < 1e-12);
      CHECK(std::abs(v.cn - cn) < 1e-12);
      CHECK(std::abs(v.dn - dn) < 1e-12);
    }
  }
}

TEST_CASE("complete elliptic integral and the cn period") {
  for (double k : {0.0, 0.3, 0.5, 0.9}) {
    CHECK(elliptic_k(k) == doctest::Approx(boost::math::ellint_1(k)).epsilon(1e-13));
    const double big_k = elliptic_k(k);
    CHECK(std::abs(jacobi_elliptic(4 * big_k, k).cn - 1.0) < 1e-10);
    CHECK(std::abs(jacobi_elliptic(big_k, k).cn) < 1e-10);
    CHECK(std::abs(jacobi_elliptic(2 * big_k, k).dn - 1.0) < 1e-10);
  }
  CHECK(elliptic_k(0.0) == doctest::Approx(M_PI / 2));
  CHECK_THROWS(elliptic_k(1.0));
}

TEST_CASE("jacobi identities hold on a grid") {
  for (double k = 0.05; k < 1.0; k += 0.15)
    for (double u = -5; u < 5; u += 0.37) {
      const JacobiValues v = jacobi_elliptic(u, k);
      CHECK(v.sn * v.sn + v.cn * v.cn == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(v.dn * v.dn + k * k * v.sn * v.sn == doctest::Approx(1.0).epsilon(1e-13));
    }
}
