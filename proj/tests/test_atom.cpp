#include <doctest.h>

#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/jacobi_elliptic.hpp>

#include "nlqm/atom.hpp"
#include "support.hpp"

using namespace nlqm;

namespace {

const std::complex<double> I(0, 1);

AtomFieldParams sigma3_type(double eps0_half) {
  AtomFieldParams p;
  p.eps_levels = {-eps0_half, eps0_half};
  return p;
}

double linf_vs(const InversionSeries& s, const std::function<double(double)>& ref) {
  double err = 0;
  for (std::size_t i = 0; i < s.times.size(); ++i) err = std::max(err, std::abs(s.w[i] - ref(s.times[i])));
  return err;
}

}  // namespace

TEST_CASE("derived constants of the atom-field parameters") {
  AtomFieldParams p;
  p.omega_levels = {0.0, 1.3};
  p.eps_levels = {0.2, 0.9};
  p.omega = 1.0;
  p.q = 0.7;
  CHECK(p.omega0() == doctest::Approx(1.3));
  CHECK(p.eps0() == doctest::Approx(0.7));
  CHECK(p.detuning() == doctest::Approx(0.3));
  CHECK(p.epsilon() == doctest::Approx(0.98));
  // eps^2 / 8 = 2 varsigma^2
  CHECK(p.epsilon() * p.epsilon() / 8 == doctest::Approx(2 * p.varsigma() * p.varsigma()));
  CHECK(p.detuning_prime() == doctest::Approx(0.3 + 0.81 - 0.04));
  CHECK(p.rabi(1.0) == doctest::Approx(0.7));
  p.eps_levels = {0.0};
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("linear model is the truncated Jaynes-Cummings matrix") {
  AtomFieldParams p;
  const AtomFieldModel m = build_atom_field(AtomDescription::polchinski, p);
  const MatrixXc jc = jaynes_cummings_matrix(p);
  CHECK(hermiticity_residual(jc) == 0.0);
  const Index nf = p.n_max + 1;
  // |0, 1> couples to |1, 0> with (i q / 2) sqrt(1).
  CHECK(jc(1 * nf + 0, 0 * nf + 1) == std::complex<double>(0, 0.5));
  const VectorXc psi = fock_state(p, 0, 1).amplitudes();
  CHECK((m.builder(psi) * psi - jc * psi).norm() < 1e-12);
}

TEST_CASE("eps = 0 gives resonant Rabi oscillation -cos(q t)") {
  AtomFieldParams p;
  p.q = 1.0;
  const auto model = build_atom_field(AtomDescription::polchinski, p);
  const InversionSeries s = inversion_trajectory(model, fock_state(p, 0, 1), 20.0, 0.01);
  CHECK(s.regime == "linear");
  CHECK(linf_vs(s, [](double t) { return -std::cos(t); }) < 1e-7);
  CHECK(s.n_drift < 1e-9);
  CHECK(s.norm_drift < 1e-7);
  CHECK(s.h_drift < 1e-7);
}

TEST_CASE("complex coupling enters through |q|") {
  AtomFieldParams p;
  p.q = 0.6 * std::exp(I * 0.8);
  const auto s = inversion_trajectory(build_atom_field(AtomDescription::polchinski, p), fock_state(p, 0, 1), 10.0, 0.01);
  CHECK(linf_vs(s, [](double t) { return -std::cos(0.6 * t); }) < 1e-7);
}

TEST_CASE("elliptic inversion against an independent Jacobi implementation") {
  const double omega = 1.0;
  for (double sigma : {0.0, 0.5, 2.0}) {
    for (double t : {0.0, 0.7, 3.1, 9.0}) {
      double cn = 0, dn = 0;
      double expected = -std::cos(omega * t);
      if (sigma > 0 && sigma < omega) {
        boost::math::jacobi_elliptic(sigma / omega, omega * t, &cn, &dn);
        expected = -cn;
      } else if (sigma > omega) {
        boost::math::jacobi_elliptic(omega / sigma, sigma * t, &cn, &dn);
        expected = -dn;
      }
      CHECK(elliptic_inversion(omega, sigma, t) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  CHECK(elliptic_inversion(1.0, 1.0, 0.0) == doctest::Approx(-1.0));
  CHECK(std::abs(elliptic_inversion(1.0, 1.0, 40.0)) < 1e-15);
  const double period = 4 * boost::math::ellint_1(0.5);
  CHECK(elliptic_inversion(1.0, 0.5, period) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(inversion_regime(1.0, 0.5) == "Omega>sigma");
  CHECK(inversion_regime(1.0, 2.0) == "Omega<sigma");
}

TEST_CASE("polchinski nonlinearity bends the inversion onto cn") {
  // eps_levels = -+1/2: eps0 = 1, epsilon = 2, varsigma = 1/2, Omega = 1.
  const AtomFieldParams p = sigma3_type(0.5);
  const auto s = inversion_trajectory(build_atom_field(AtomDescription::polchinski, p), fock_state(p, 0, 1),
                                      8 * boost::math::ellint_1(0.5), 0.01);
  CHECK(s.regime == "Omega>sigma");
  CHECK(linf_vs(s, [](double t) { return elliptic_inversion(1.0, 0.5, t); }) < 1e-4);
  const OdeResidual r = inversion_ode_check(s, p, -0.5, 0.5);
  CHECK(r.linf < 1e-3);
  CHECK(s.n_drift < 1e-9);
}

TEST_CASE("inversion ODE residual is second order in the sample spacing") {
  AtomFieldParams p;
  p.omega_levels = {0.0, 1.3};
  p.eps_levels = {0.2, 0.9};
  p.q = 0.7;
  const auto model = build_atom_field(AtomDescription::polchinski, p);
  const auto fine = inversion_trajectory(model, fock_state(p, 0, 1), 10.0, 0.01);
  const auto coarse = inversion_trajectory(model, fock_state(p, 0, 1), 10.0, 0.02);
  const double a = inversion_ode_check(fine, p, -0.5, 0.5).linf;
  const double b = inversion_ode_check(coarse, p, -0.5, 0.5).linf;
  CHECK(a < 1e-3);
  CHECK(b / a > 3.5);
  CHECK(b / a < 4.5);
  InversionSeries sparse = fine;
  sparse.times.clear();
  sparse.w.clear();
  for (std::size_t i = 0; i < fine.times.size(); i += 50) {
    sparse.times.push_back(fine.times[i]);
    sparse.w.push_back(fine.w[i]);
  }
  CHECK_THROWS_AS(inversion_ode_check(sparse, p, -0.5, 0.5), ResolutionError);
}

TEST_CASE("excited-level start satisfies the same ODE with n' = +1/2") {
  AtomFieldParams p = sigma3_type(0.4);
  p.omega_levels = {0.0, 1.1};
  const auto model = build_atom_field(AtomDescription::polchinski, p);
  const auto s = inversion_trajectory(model, fock_state(p, 1, 0), 10.0, 0.01);
  CHECK(s.w.front() == doctest::Approx(1.0));
  CHECK(inversion_ode_check(s, p, 0.5, 0.5).linf < 1e-3);
}

TEST_CASE("weinberg-fock sigma3 nonlinearity leaves the inversion untouched") {
  for (double e : {0.25, 0.5, 1.0}) {
    CAPTURE(e);
    const AtomFieldParams p = sigma3_type(e);
    const auto s = inversion_trajectory(build_atom_field(AtomDescription::weinberg_fock, p), fock_state(p, 0, 1), 20.0,
                                        0.0025);
    CHECK(linf_vs(s, [](double t) { return -std::cos(t); }) < 1e-8);
  }
  const AtomFieldParams p = sigma3_type(0.25);
  const auto s =
      inversion_trajectory(build_atom_field(AtomDescription::polchinski, p), fock_state(p, 0, 1), 20.0, 0.01);
  CHECK(linf_vs(s, [](double t) { return -std::cos(t); }) > 0.01);
}

TEST_CASE("weinberg-fock level shifts are eps_k^2") {
  // Detuning the field by eps_2^2 - eps_1^2 restores resonance.
  AtomFieldParams p;
  p.eps_levels = {0.3, 0.8};
  p.omega = 1.0 + 0.64 - 0.09;
  const auto s = inversion_trajectory(build_atom_field(AtomDescription::weinberg_fock, p), fock_state(p, 0, 1), 10.0,
                                      0.005);
  CHECK(linf_vs(s, [](double t) { return -std::cos(t); }) < 1e-7);
}

TEST_CASE("truncation leak names n_max") {
  AtomFieldParams p;
  p.n_max = 1;
  const auto model = build_atom_field(AtomDescription::polchinski, p);
  CHECK_THROWS_WITH_AS(inversion_trajectory(model, fock_state(p, 0, 1), 1.0, 0.01), doctest::Contains("n_max"),
                       IntegrationError);
}

TEST_CASE("third-level phases depend on the two-level inversion") {
  AtomFieldParams p;
  p.omega_levels = {0.0, 1.0, 1.7};
  p.eps_levels = {-0.5, 0.5, 0.3};
  const auto model = build_atom_field(AtomDescription::polchinski, p);
  auto run = [&](Index level, Index photons) {
    VectorXc v = std::sqrt(0.8) * fock_state(p, level, photons).amplitudes();
    v += std::sqrt(0.2) * fock_state(p, 2, 0).amplitudes();
    return inversion_trajectory(model, StateVector(v, p.dims()), 5.0, 0.01);
  };
  const auto ground = run(0, 1), excited = run(1, 0);
  const auto& mod = ground.level_moduli.at("modulus_k2_n0");
  double drift = 0;
  for (double m : mod) drift = std::max(drift, std::abs(m - mod.front()));
  CHECK(drift < 1e-9);
  const double dphi = ground.level_phases.at("phase_k2_n0").back() - excited.level_phases.at("phase_k2_n0").back();
  CHECK(std::abs(dphi) > 1e-2);
}
