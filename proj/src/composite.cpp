#include "nlqm/composite.hpp"

#include <cmath>

#include "nlqm/spectra.hpp"

namespace nlqm {

namespace {

const std::complex<double> I(0.0, 1.0);

double max_abs(const MatrixXc& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double drift(const std::vector<double>& s) {
  double d = 0;
  for (double v : s) d = std::max(d, std::abs(v - s.front()));
  return d;
}

// Expectation of a 2x2 operator in the reduced matrix of one factor.
double reduced_average(const VectorXc& psi, std::size_t slot, const MatrixXc& op) {
  const MatrixXc rho = reduce_pure(psi, Dims{2, 2}, slot);
  return ((rho * op).trace() / rho.trace()).real();
}

}  // namespace

HomogeneousObservable weinberg_composite(const HomogeneousObservable& h_sub, Index d_sub, Index d_rest,
                                         const MatrixXc& rest_basis) {
  return catalog::weinberg_lift(h_sub, d_sub, d_rest, rest_basis, catalog::SubsystemSlot::first);
}

HomogeneousObservable two_qubit_hamiltonian(const CompositeDescription& desc, double e1, double e2, double eps) {
  const HomogeneousObservable h2 = [&] {
    if (desc.kind == DescriptionKind::polchinski)
      return catalog::density_functional(Dims{2, 2}, 1, e2, pauli(3), eps, desc.variant);
    return catalog::weinberg_lift(catalog::canonical_degenerate(e2, eps), 2, 2, desc.rest_basis,
                                  catalog::SubsystemSlot::second);
  }();
  auto eval = [h2, e1](const VectorXc& psi) { return e1 * psi.squaredNorm() + h2(psi); };
  std::optional<HomogeneousObservable::Gradient> grad;
  if (h2.analytic_gradient()) {
    auto g2 = *h2.analytic_gradient();
    grad = [g2, e1](const VectorXc& psi) -> VectorXc { return e1 * psi + g2(psi); };
  }
  const std::string kind = desc.kind == DescriptionKind::polchinski ? "polchinski" : "weinberg";
  return HomogeneousObservable(kind + "-two-qubit", eval, grad, {{"E1", e1}, {"E2", e2}, {"eps", eps}});
}

StateVector singlet() {
  VectorXc v = VectorXc::Zero(4);
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = -1.0 / std::sqrt(2.0);
  return StateVector(v, Dims{2, 2});
}

MatrixXc sender_matrix(std::complex<double> alpha, std::complex<double> beta) {
  const double n = std::norm(alpha) + std::norm(beta);
  if (std::abs(n - 1.0) > 1e-10) throw InvalidStateError("sender basis: |alpha|^2 + |beta|^2 must be 1");
  MatrixXc m(2, 2);
  m << alpha, beta, -std::conj(beta), std::conj(alpha);
  return m;
}

// ---------------------------------------------------------------------------

namespace {

double reduced_factor(catalog::DensityVariant variant, const Eigen::VectorXd& e, const MatrixXc& rho) {
  const double tr = rho.trace().real();
  double mean = 0;
  for (Index k = 0; k < e.size(); ++k) mean += e(k) * rho(k, k).real();
  mean /= tr;
  double factor = 2 * mean;
  if (variant == catalog::DensityVariant::purity_weighted) factor *= (rho * rho).trace().real() / (tr * tr);
  return factor;
}

MatrixXc reduced_rhs(double factor, const Eigen::VectorXd& e, const MatrixXc& rho) {
  MatrixXc out(rho.rows(), rho.cols());
  for (Index k = 0; k < rho.rows(); ++k)
    for (Index l = 0; l < rho.cols(); ++l) out(k, l) = -I * factor * (e(k) - e(l)) * rho(k, l);
  return out;
}

Eigen::VectorXd diagonal_weights(const HermitianOperator& epshat) {
  const MatrixXc& m = epshat.matrix();
  const MatrixXc off = m - MatrixXc(m.diagonal().asDiagonal());
  if (max_abs(off) > tolerance::hermitian) throw Error("reduced flow: the weight operator must be diagonal");
  return m.diagonal().real();
}

}  // namespace

double coherence_rate(catalog::DensityVariant variant, const HermitianOperator& epshat, const DensityMatrix& rho,
                      Index k, Index l) {
  const Eigen::VectorXd e = diagonal_weights(epshat);
  if (rho.size() != e.size()) throw DimensionError("coherence_rate: size mismatch");
  const MatrixXc& r = rho.matrix();
  const double tr = r.trace().real();
  double mean = 0;
  for (Index j = 0; j < e.size(); ++j) mean += e(j) * r(j, j).real();
  mean /= tr;
  double rate = 2 * mean * (e(k) - e(l));
  if (variant == catalog::DensityVariant::purity_weighted) rate *= rho.purity() / (tr * tr);
  // arg rho_kl decreases at this rate.
  return rate;
}

DensityTrajectory polchinski_reduced_flow(catalog::DensityVariant variant, const HermitianOperator& epshat,
                                          const DensityMatrix& rho0, double t_end, double dt) {
  const Eigen::VectorXd e = diagonal_weights(epshat);
  if (rho0.size() != e.size()) throw DimensionError("polchinski_reduced_flow: size mismatch");
  const auto grid = step_grid(t_end, dt);
  // The factor depends only on trace, mean weight and purity, which the exact
  // flow conserves, so it is evaluated once. Re-evaluating it on RK stages
  // would pick up the integrator's O(h^2) purity excursions.
  const double factor = reduced_factor(variant, e, rho0.matrix());
  auto f = [&](double, const MatrixXc& r) -> MatrixXc { return reduced_rhs(factor, e, r); };
  auto invariants = [&](const MatrixXc& r) {
    double te = 0;
    for (Index k = 0; k < e.size(); ++k) te += e(k) * r(k, k).real();
    return Eigen::Vector3d(r.trace().real(), te, (r * r).trace().real());
  };

  DensityTrajectory out;
  MatrixXc rho = rho0.matrix();
  const Eigen::Vector3d inv0 = invariants(rho);
  const bool has01 = rho.rows() >= 2;
  double phase = has01 ? std::arg(rho(0, 1)) : 0.0;
  auto record = [&](double t) {
    const Eigen::Vector3d inv = invariants(rho);
    out.times.push_back(t);
    out.rho.push_back(rho);
    out.recorded["trace"].push_back(inv(0));
    out.recorded["mean_eps"].push_back(inv(1) / inv(0));
    out.recorded["purity"].push_back(inv(2));
    if (has01) {
      out.recorded["re_rho01"].push_back(rho(0, 1).real());
      out.recorded["im_rho01"].push_back(rho(0, 1).imag());
      out.recorded["phase01"].push_back(phase);
    }
  };
  record(0.0);
  for (long k = 1; k <= grid.steps; ++k) {
    const double prev_arg = has01 ? std::arg(rho(0, 1)) : 0.0;
    rho = rk4_step(f, (k - 1) * grid.h, rho, grid.h);
    const double worst = (invariants(rho) - inv0).cwiseAbs().maxCoeff();
    if (worst > 1e-9)
      throw IntegrationError("polchinski_reduced_flow: invariant drift " + std::to_string(worst) + " at step " +
                             std::to_string(k));
    if (has01 && std::abs(rho(0, 1)) > 0) phase += std::remainder(std::arg(rho(0, 1)) - prev_arg, 2 * M_PI);
    record(k * grid.h);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

NlsOptions telegraph_options(const HomogeneousObservable& h) {
  NlsOptions opt;
  opt.hamiltonian_function = h;
  opt.h_drift_bound = 1e-7;
  return opt;
}

}  // namespace

TelegraphReport gisin_telegraph(const TelegraphParams& p, double t_end, double dt) {
  const MatrixXc m = sender_matrix(p.alpha, p.beta);
  CompositeDescription desc;
  desc.kind = DescriptionKind::weinberg;
  const HomogeneousObservable h = two_qubit_hamiltonian(desc, p.e1, p.e2, p.eps);
  const StateVector psi0 = rotate_subsystem(singlet(), m, 0);

  const MatrixXc s2 = pauli(2);
  NlsOptions opt = telegraph_options(h);
  opt.observers["sigma2"] = [s2](const VectorXc& v) { return reduced_average(v, 1, s2); };
  const Trajectory traj = integrate_nls(flow_generator(h), psi0, t_end, dt, opt);

  TelegraphReport r;
  r.times = traj.times;
  r.signal = traj.recorded.at("sigma2");
  const double amp = 2 * (std::conj(p.alpha) * p.beta).real();
  const double omega = 4 * p.eps * (std::norm(p.alpha) - std::norm(p.beta));
  r.expected_amplitude = std::abs(amp);
  r.expected_omega = std::abs(omega);
  for (double t : r.times) r.analytic.push_back(amp * std::sin(omega * t));
  for (std::size_t i = 0; i < r.times.size(); ++i)
    r.linf_error = std::max(r.linf_error, std::abs(r.signal[i] - r.analytic[i]));
  const SinusoidFit fit = fit_sinusoid(r.times, r.signal);
  r.signal_amplitude = fit.amplitude;
  r.signal_omega = fit.omega;
  r.norm_drift = drift(traj.recorded.at("norm"));
  r.h_drift = drift(traj.recorded.at("H"));
  return r;
}

TelegraphReport mobility_telegraph(double eps, double theta, double t_end, double dt) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  VectorXc v(4);
  v << c, s, -s, c;
  const StateVector psi0(v / std::sqrt(2.0), Dims{2, 2});
  // Linear first factor (zero energy), nonlinear second factor sliced over the first.
  CompositeDescription desc;
  const HomogeneousObservable h = two_qubit_hamiltonian(desc, 0.0, 0.0, eps);

  NlsOptions opt = telegraph_options(h);
  for (int k = 1; k <= 3; ++k) {
    const MatrixXc sk = pauli(k);
    opt.observers["sigma" + std::to_string(k)] = [sk](const VectorXc& x) { return reduced_average(x, 0, sk); };
  }
  opt.observers["mixed_dev"] = [](const VectorXc& x) {
    const MatrixXc rho = reduce_pure(x, Dims{2, 2}, 0);
    return max_abs(rho - MatrixXc::Identity(2, 2) / 2.0);
  };
  const Trajectory traj = integrate_nls(flow_generator(h), psi0, t_end, dt, opt);

  TelegraphReport r;
  r.times = traj.times;
  r.signal = traj.recorded.at("sigma2");
  r.expected_amplitude = std::abs(std::sin(theta));
  r.expected_omega = std::abs(4 * eps * std::cos(theta));
  for (double t : r.times) r.analytic.push_back(-std::sin(theta) * std::sin(4 * eps * std::cos(theta) * t));
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    r.linf_error = std::max(r.linf_error, std::abs(r.signal[i] - r.analytic[i]));
    r.max_abs_sigma1 = std::max(r.max_abs_sigma1, std::abs(traj.recorded.at("sigma1")[i]));
    r.max_abs_sigma3 = std::max(r.max_abs_sigma3, std::abs(traj.recorded.at("sigma3")[i]));
    r.max_dev_from_mixed = std::max(r.max_dev_from_mixed, traj.recorded.at("mixed_dev")[i]);
  }
  const SinusoidFit fit = fit_sinusoid(r.times, r.signal);
  r.signal_amplitude = fit.amplitude;
  r.signal_omega = fit.omega;
  r.norm_drift = drift(traj.recorded.at("norm"));
  r.h_drift = drift(traj.recorded.at("H"));
  return r;
}

NoSignalingReport no_signaling_check(const HomogeneousObservable& h_total, const MatrixXc& remote_u, double t_end,
                                     double dt) {
  const StateVector a0 = singlet();
  const StateVector b0 = rotate_subsystem(a0, remote_u, 0);
  NlsOptions opt;
  opt.hamiltonian_function = h_total;
  const Trajectory a = integrate_nls(flow_generator(h_total), a0, t_end, dt, opt);
  const Trajectory b = integrate_nls(flow_generator(h_total), b0, t_end, dt, opt);
  NoSignalingReport r;
  r.times = a.times;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    const MatrixXc ra = reduce_pure(a.states[i], a.dims, 1);
    const MatrixXc rb = reduce_pure(b.states[i], b.dims, 1);
    r.deviation.push_back(max_abs(ra - rb));
    r.max_deviation = std::max(r.max_deviation, r.deviation.back());
  }
  return r;
}

TwoDecomposition gisin_decompositions(std::complex<double> alpha, std::complex<double> beta) {
  const MatrixXc m = sender_matrix(alpha, beta);
  TwoDecomposition out;
  auto decompose = [](const VectorXc& psi, std::vector<double>& w, std::vector<VectorXc>& states, MatrixXc& mix) {
    mix = MatrixXc::Zero(2, 2);
    for (Index i = 0; i < 2; ++i) {
      const VectorXc slice = psi.segment(2 * i, 2);
      const double p = slice.squaredNorm();
      w.push_back(p);
      states.push_back(p > 0 ? VectorXc(slice / std::sqrt(p)) : slice);
      mix += slice * slice.adjoint();
    }
  };
  const VectorXc psi = singlet().amplitudes();
  decompose(psi, out.weights_a, out.states_a, out.mixture_a);
  // Reading the first factor in the rows of m.
  decompose(apply_on_factor(psi, m, Dims{2, 2}, 0), out.weights_b, out.states_b, out.mixture_b);
  return out;
}

// ---------------------------------------------------------------------------

MatrixXc paradox_analytic(const ParadoxParams& p, double t) {
  const double w = 2 * p.lambda2 * p.f * t;
  return p.lambda1 / 2 * pauli(0) +
         p.lambda2 / 4 * (2.0 * pauli(0) + pauli(1) + std::cos(w) * pauli(3) - std::sin(w) * pauli(2));
}

MatrixXc paradox_projector(const ParadoxParams& p, double t, int sign) {
  const double w = 2 * p.lambda2 * p.f * t;
  return (pauli(0) + double(sign > 0 ? 1 : -1) * (std::cos(w) * pauli(3) + std::sin(w) * pauli(2))) / 2.0;
}

ParadoxReport intention_paradox(const ParadoxParams& p, double dt) {
  if (p.lambda1 < 0 || p.lambda2 < 0 || std::abs(p.lambda1 + p.lambda2 - 1) > 1e-12)
    throw Error("intention_paradox: lambda1, lambda2 must be probabilities summing to 1");
  MatrixXc branch(2, 2);
  branch << 0.75, 0.25, 0.25, 0.25;
  MatrixXc rho = p.lambda1 / 2 * pauli(0) + p.lambda2 * branch;
  const MatrixXc s1 = pauli(1), s3 = pauli(3);
  const MatrixXc p_up = (pauli(0) + s3) / 2.0;
  auto f = [&](double, const MatrixXc& r) -> MatrixXc {
    const double m1 = ((r * s1).trace() / r.trace()).real();
    return -I * (2 * p.f * m1) * (s1 * r - r * s1);
  };
  const MatrixXc rho0 = rho;
  const double m10 = (rho * s1).trace().real();
  const auto grid = step_grid(p.t, dt);

  ParadoxReport r;
  auto record = [&](double t) {
    r.times.push_back(t);
    r.rho.push_back(rho);
    r.analytic.push_back(paradox_analytic(p, t));
    r.max_deviation = std::max(r.max_deviation, max_abs(rho - r.analytic.back()));
    r.max_sigma1_drift = std::max(r.max_sigma1_drift, std::abs((rho * s1).trace().real() - m10));
    const double direct = (rho * p_up).trace().real();
    const double heisenberg = (rho0 * paradox_projector(p, t, +1)).trace().real();
    r.heisenberg_mismatch = std::max(r.heisenberg_mismatch, std::abs(direct - heisenberg));
  };
  record(0.0);
  for (long k = 1; k <= grid.steps; ++k) {
    rho = rk4_step(f, (k - 1) * grid.h, rho, grid.h);
    if (std::abs((rho * s1).trace().real() - m10) > 1e-10)
      throw IntegrationError("intention_paradox: Tr(rho s1) is not conserved at step " + std::to_string(k));
    record(k * grid.h);
  }
  r.sigma3_initial = (rho0 * s3).trace().real();
  r.sigma3_final = (rho * s3).trace().real();
  r.p_up_initial = (rho0 * p_up).trace().real();
  r.p_up_final = (rho * p_up).trace().real();
  return r;
}

}  // namespace nlqm
