#include "nlqm/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace nlqm {

namespace {
const std::complex<double> I(0.0, 1.0);
}

StepGrid step_grid(double t_end, double dt) {
  if (!(dt > 0) || !std::isfinite(dt)) throw Error("time step must be positive and finite");
  if (!(t_end >= 0) || !std::isfinite(t_end)) throw Error("t_end must be non-negative and finite");
  if (t_end == 0) return {0, 0.0};
  // Guard against ratios like 1/0.1 = 10.000000000000002.
  const long n = std::max(1L, static_cast<long>(std::ceil(t_end / dt * (1.0 - 1e-12))));
  return {n, t_end / static_cast<double>(n)};
}

Trajectory integrate_nls(const OperatorBuilder& builder, const StateVector& psi0, double t_end, double dt,
                         const NlsOptions& options) {
  psi0.require_nonzero("integrate_nls");
  if (options.state_stride < 1) throw Error("integrate_nls: state_stride must be >= 1");
  const auto grid = step_grid(t_end, dt);
  const Index n = psi0.size();

  Trajectory traj;
  traj.dims = psi0.dims();
  traj.times.reserve(grid.steps + 1);
  auto& norm = traj.recorded["norm"];
  std::vector<double>* hvals = options.hamiltonian_function ? &traj.recorded["H"] : nullptr;
  std::vector<std::pair<std::vector<double>*, const StateSeries*>> obs;
  for (const auto& [name, f] : options.observers) obs.emplace_back(&traj.recorded[name], &f);

  auto checked = [&](const VectorXc& v, double t) {
    MatrixXc m = builder(v);
    if (m.rows() != n || m.cols() != n) throw DimensionError("integrate_nls: builder returned the wrong size");
    if (!m.allFinite()) throw IntegrationError("integrate_nls: non-finite generator at t = " + std::to_string(t));
    const double r = hermiticity_residual(m);
    if (r > options.hermitian_gate)
      throw NotHermitianError("integrate_nls: generator at t = " + std::to_string(t), r);
    return m;
  };

  VectorXc y = psi0.amplitudes();
  const double n0 = y.squaredNorm();
  double h0 = 0.0;
  auto record = [&](long k, double t) {
    traj.times.push_back(t);
    norm.push_back(y.squaredNorm());
    if (hvals) hvals->push_back((*options.hamiltonian_function)(y));
    for (auto& [series, f] : obs) series->push_back((*f)(y));
    if (k % options.state_stride == 0 || k == grid.steps) traj.states.push_back(y);
  };
  record(0, 0.0);
  if (hvals) h0 = hvals->front();

  const double h = grid.h;
  for (long k = 1; k <= grid.steps; ++k) {
    const double t = (k - 1) * h;
    const MatrixXc m1 = checked(y, t);
    const VectorXc k1 = -I * (m1 * y);
    const VectorXc y2 = y + (h / 2) * k1;
    const VectorXc k2 = -I * (builder(y2) * y2);
    const VectorXc y3 = y + (h / 2) * k2;
    const VectorXc k3 = -I * (builder(y3) * y3);
    const VectorXc y4 = y + h * k3;
    const VectorXc k4 = -I * (builder(y4) * y4);
    y += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite()) throw IntegrationError("integrate_nls: state became non-finite at t = " + std::to_string(t));
    record(k, k * h);

    const double drift = std::abs(norm.back() - n0) / n0;
    if (drift > options.norm_drift_per_step * k) {
      std::ostringstream os;
      os.precision(3);
      os << "integrate_nls: norm drift " << drift << " after " << k << " steps exceeds the budget "
         << options.norm_drift_per_step * k << "; relative drift profile:";
      const long stride = std::max(1L, k / 8);
      for (long j = 0; j <= k; j += stride) os << " t=" << traj.times[j] << ":" << (norm[j] - n0) / n0;
      throw IntegrationError(os.str());
    }
    if (hvals && std::abs(hvals->back() - h0) > options.h_drift_bound) {
      std::ostringstream os;
      os << "integrate_nls: Hamiltonian-function drift " << std::abs(hvals->back() - h0) << " at t = " << k * h
         << " exceeds " << options.h_drift_bound;
      throw IntegrationError(os.str());
    }
  }
  return traj;
}

OperatorBuilder flow_generator(const HomogeneousObservable& h) {
  return [h](const VectorXc& psi) -> MatrixXc {
    const VectorXc g = wirtinger_gradient(h, psi);
    const double n = psi.squaredNorm();
    const double a = psi.dot(g).real();
    MatrixXc m = (g * psi.adjoint() + psi * g.adjoint()) / n - (a / (n * n)) * (psi * psi.adjoint());
    return (m + m.adjoint()) / 2.0;
  };
}

OperatorBuilder hessian_generator(const HomogeneousObservable& h) {
  return [h](const VectorXc& psi) -> MatrixXc { return nonlinear_operator(h, psi).matrix(); };
}

OperatorBuilder constant_generator(const MatrixXc& h) {
  return [h](const VectorXc&) -> MatrixXc { return h; };
}

OperatorBuilder ab_minus_ba(const MatrixXc& h0, const MatrixXc& a, const MatrixXc& b) {
  if (h0.rows() != a.rows() || h0.rows() != b.rows()) throw DimensionError("ab_minus_ba: size mismatch");
  for (const MatrixXc* m : {&h0, &a, &b})
    if (hermiticity_residual(*m) > tolerance::hermitian)
      throw NotHermitianError("ab_minus_ba", hermiticity_residual(*m));
  return [h0, a, b](const VectorXc& psi) -> MatrixXc {
    const double n = psi.squaredNorm();
    const double ea = psi.dot(a * psi).real() / n;
    const double eb = psi.dot(b * psi).real() / n;
    return h0 + ea * b - eb * a;
  };
}

StateVector canonical_solution(const std::vector<double>& e, const std::vector<double>& eps, const StateVector& psi0,
                               double t) {
  const Index d = psi0.size();
  if (static_cast<Index>(e.size()) != d || static_cast<Index>(eps.size()) != d)
    throw DimensionError("canonical_solution: E and eps must have one entry per component");
  psi0.require_nonzero("canonical_solution");
  const VectorXc& p = psi0.amplitudes();
  double mean = 0.0;
  for (Index k = 0; k < d; ++k) mean += eps[k] * std::norm(p(k));
  mean /= p.squaredNorm();
  VectorXc out(d);
  for (Index k = 0; k < d; ++k) out(k) = p(k) * std::exp(-I * ((e[k] + 2 * mean * eps[k] - mean * mean) * t));
  return StateVector(out, psi0.dims());
}

// ---------------------------------------------------------------------------

Eigen::Vector3d BlochParams::rotation(const BlochState& r) const {
  return {-omega - a / 2 * r.v, a / 2 * r.u, delta + 2 * eps * r.w};
}

Eigen::Vector3d BlochParams::rhs(const Eigen::Vector3d& r) const {
  const double u = r(0), v = r(1), w = r(2);
  if (form == BlochForm::rotating_frame) return rotation({u, v, w}).cross(r);
  return {-delta * v - 2 * eps * w * v + a / 2 * u * w, delta * u + omega * w + 2 * eps * w * u - a / 2 * v * w,
          -omega * v - a / 2 * (u * u + v * v)};
}

BlochTrajectory integrate_bloch(const BlochParams& p, const BlochState& r0, double t_end, double dt,
                                double instability_gate) {
  for (double x : {p.delta, p.omega, p.a, p.eps, r0.u, r0.v, r0.w})
    if (!std::isfinite(x)) throw Error("integrate_bloch: non-finite parameter or initial state");
  const auto grid = step_grid(t_end, dt);
  const double h = grid.h;
  auto f = [&p](double, const Eigen::Vector3d& r) -> Eigen::Vector3d { return p.rhs(r); };
  // Exact d|r|^2/dt of the chosen form.
  auto rate = [&p](const Eigen::Vector3d& r) {
    return p.form == BlochForm::jaynes ? -2 * p.a * r(2) * r(1) * r(1) : 0.0;
  };

  BlochTrajectory out;
  Eigen::Vector3d y(r0.u, r0.v, r0.w);
  auto record = [&](double t) {
    out.times.push_back(t);
    out.u.push_back(y(0));
    out.v.push_back(y(1));
    out.w.push_back(y(2));
  };
  record(0.0);
  for (long k = 1; k <= grid.steps; ++k) {
    const Eigen::Vector3d prev = y;
    const Eigen::Vector3d f0 = p.rhs(prev);
    y = rk4_step(f, (k - 1) * h, prev, h);
    if (!y.allFinite()) throw IntegrationError("integrate_bloch: non-finite state at step " + std::to_string(k));
    // Cubic Hermite midpoint, then Simpson.
    const Eigen::Vector3d f1 = p.rhs(y);
    const Eigen::Vector3d mid = (prev + y) / 2 + h * (f0 - f1) / 8;
    const double expected = h / 6 * (rate(prev) + 4 * rate(mid) + rate(y));
    const double actual = y.squaredNorm() - prev.squaredNorm();
    if (std::abs(actual - expected) > instability_gate) {
      std::ostringstream os;
      os << "integrate_bloch: step-size instability at t = " << k * h << " (|r|^2 changed by " << actual
         << ", expected " << expected << "); reduce dt";
      throw IntegrationError(os.str());
    }
    record(k * h);
  }
  return out;
}

OperatorBuilder neo_hamiltonian(double a, double eps, const MatrixXc& base) {
  if (base.rows() != 2 || base.cols() != 2) throw DimensionError("neo_hamiltonian: two-dimensional only");
  if (hermiticity_residual(base) > tolerance::hermitian)
    throw NotHermitianError("neo_hamiltonian", hermiticity_residual(base));
  const MatrixXc s1 = pauli(1), s2 = pauli(2), s3 = pauli(3), id = pauli(0);
  return [=](const VectorXc& psi) -> MatrixXc {
    if (psi.size() != 2) throw DimensionError("neo_hamiltonian: state must be two-dimensional");
    const double n = psi.squaredNorm();
    const double e1 = psi.dot(s1 * psi).real() / n;
    const double e2 = psi.dot(s2 * psi).real() / n;
    const double e3 = psi.dot(s3 * psi).real() / n;
    return base - (eps / 2 * e3 * e3) * id + (a / 4) * (e1 * s2 - e2 * s1) + (eps * e3) * s3;
  };
}

}  // namespace nlqm
