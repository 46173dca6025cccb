#pragma once

// Fixed-step integration of i dpsi/dt = H(psi) psi and of the neoclassical
// Bloch equations, the exact canonical-family solution, and Jacobi elliptic
// functions.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlqm/core.hpp"
#include "nlqm/observables.hpp"

namespace nlqm {

/// Classical fourth-order Runge-Kutta step for y' = f(t, y). Works for any Eigen
/// vector or matrix type.
template <typename State, typename F>
State rk4_step(const F& f, double t, const State& y, double h) {
  const State k1 = f(t, y);
  const State k2 = f(t + h / 2, State(y + (h / 2) * k1));
  const State k3 = f(t + h / 2, State(y + (h / 2) * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Uniform grid used by every integrator: N = ceil(t_end/dt) steps of t_end/N.
struct StepGrid {
  long steps;
  double h;
};
StepGrid step_grid(double t_end, double dt);

/// Maps a state to the (possibly state-dependent) matrix of the evolution.
using OperatorBuilder = std::function<MatrixXc(const VectorXc&)>;
using StateSeries = std::function<double(const VectorXc&)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<VectorXc> states;
  Dims dims;
  /// Always holds "norm"; "H" when a Hamiltonian function was supplied; plus
  /// every requested observer.
  std::map<std::string, std::vector<double>> recorded;

  StateVector state(std::size_t i) const { return StateVector(states.at(i), dims); }
  std::size_t size() const noexcept { return times.size(); }
};

struct NlsOptions {
  /// Recorded as "H" and, together with the norm, checked for drift.
  std::optional<HomogeneousObservable> hamiltonian_function;
  std::map<std::string, StateSeries> observers;
  /// Allowed |n(t) - n(0)| / n(0) per step taken.
  double norm_drift_per_step = 1e-6;
  /// Allowed |H(t) - H(0)| over the whole run.
  double h_drift_bound = 1e-6;
  /// Gate on max |M - M^dagger| for the builder output at each accepted step.
  double hermitian_gate = 1e-8;
  /// Store every k-th state (times and series are always complete).
  long state_stride = 1;
};

/// i dpsi/dt = M(psi) psi with RK4 on the grid of step_grid(t_end, dt). The norm
/// is never renormalized.
Trajectory integrate_nls(const OperatorBuilder& builder, const StateVector& psi0, double t_end, double dt,
                         const NlsOptions& options = {});

/// Rank-two Hermitian matrix M(psi) with M psi = dH/d conj(psi), assembled from
/// the gradient alone. The flow it generates is the Hamiltonian flow of `h`.
OperatorBuilder flow_generator(const HomogeneousObservable& h);
/// The Wirtinger Hessian H-hat(psi). Same flow, more expensive.
OperatorBuilder hessian_generator(const HomogeneousObservable& h);
/// Constant matrix.
OperatorBuilder constant_generator(const MatrixXc& h);

/// H0 + <A> B - <B> A: Hermitian, but <psi|H psi> = <psi|H0 psi>.
OperatorBuilder ab_minus_ba(const MatrixXc& h0, const MatrixXc& a, const MatrixXc& b);

/// Exact flow of sum_k E_k |psi_k|^2 + (sum_k eps_k |psi_k|^2)^2 / n:
/// psi_k(t) = psi_k(0) exp(-i (E_k + 2 <eps> eps_k - <eps>^2) t).
StateVector canonical_solution(const std::vector<double>& e, const std::vector<double>& eps, const StateVector& psi0,
                               double t);

// ---------------------------------------------------------------------------
// Bloch equations

struct BlochState {
  double u = 0, v = 0, w = -1;
};

/// Which right-hand side integrate_bloch uses.
///   jaynes:         u' = -D v - 2 e w v + (A/2) u w
///                   v' =  D u + W w + 2 e w u - (A/2) v w
///                   w' = -W v - (A/2)(u^2 + v^2)
///   rotating_frame: r' = w~ x r with w~ = (-W - (A/2) v, (A/2) u, D + 2 e w)
/// The two differ only in the sign of the (A/2) v w term. The rotating-frame form
/// preserves |r|; the jaynes form has d|r|^2/dt = -2 A w v^2.
enum class BlochForm { jaynes, rotating_frame };

struct BlochParams {
  double delta = 0;  ///< detuning
  double omega = 0;  ///< Rabi frequency
  double a = 0;      ///< Einstein coefficient
  double eps = 0;    ///< Lamb-shift parameter
  BlochForm form = BlochForm::jaynes;

  /// Rotating-frame vector (w~1, w~2, w~3) at r.
  Eigen::Vector3d rotation(const BlochState& r) const;
  Eigen::Vector3d rhs(const Eigen::Vector3d& r) const;
};

struct BlochTrajectory {
  std::vector<double> times;
  std::vector<double> u, v, w;
};

/// RK4 on the grid of step_grid. After every step the change of |r|^2 is compared
/// with a Simpson estimate of the integral of its exact rate; a mismatch above
/// `instability_gate` (or a non-finite state) raises IntegrationError.
BlochTrajectory integrate_bloch(const BlochParams& p, const BlochState& r0, double t_end, double dt,
                                double instability_gate = 1e-6);

/// H(psi) = base - (eps/2)<s3>^2 + (A/4)(<s1> s2 - <s2> s1) + eps <s3> s3, averages
/// normalized. Two-dimensional only.
OperatorBuilder neo_hamiltonian(double a, double eps, const MatrixXc& base);

// ---------------------------------------------------------------------------
// Elliptic functions

struct JacobiValues {
  double sn, cn, dn;
};

/// sn, cn, dn with modulus k (not parameter m = k^2), 0 <= k <= 1.
JacobiValues jacobi_elliptic(double u, double k);

/// Complete elliptic integral of the first kind, modulus k in [0, 1).
double elliptic_k(double k);

}  // namespace nlqm
