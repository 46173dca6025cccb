#include "nlqm/observables.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace nlqm {

namespace {

std::string describe(const VectorXc& psi) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Index i = 0; i < psi.size(); ++i) os << (i ? ", " : "") << psi(i).real() << (psi(i).imag() < 0 ? "" : "+") << psi(i).imag() << "i";
  os << ")";
  return os.str();
}

double checked_eval(const HomogeneousObservable::Evaluator& f, const VectorXc& psi) {
  const double v = f(psi);
  if (!std::isfinite(v)) throw SingularityError("observable is not finite at psi = " + describe(psi));
  return v;
}

VectorXc checked_gradient(const HomogeneousObservable::Gradient& g, const VectorXc& psi) {
  VectorXc v = g(psi);
  if (!v.allFinite()) throw SingularityError("observable gradient is not finite at psi = " + describe(psi));
  return v;
}

void require_nonzero(const VectorXc& psi, const char* where) {
  if (!(psi.squaredNorm() > 0.0)) throw InvalidStateError(std::string(where) + ": zero state vector");
}

// Fourth-order central difference of a vector-valued map along direction `dir`.
template <typename F>
VectorXc directional_derivative(const F& f, const VectorXc& psi, const VectorXc& dir, double h) {
  return (-f(psi + 2.0 * h * dir) + 8.0 * f(psi + h * dir) - 8.0 * f(psi - h * dir) + f(psi - 2.0 * h * dir)) /
         (12.0 * h);
}

}  // namespace

double HomogeneousObservable::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("observable '" + label_ + "' has no parameter '" + name + "'");
  return it->second;
}

WirtingerPair numeric_wirtinger(const HomogeneousObservable::Evaluator& f, const VectorXc& psi, double step) {
  const Index n = psi.size();
  WirtingerPair out{VectorXc(n), VectorXc(n)};
  VectorXc probe = psi;
  const std::complex<double> I(0.0, 1.0);
  for (Index m = 0; m < n; ++m) {
    const auto orig = psi(m);
    probe(m) = orig + step;
    const double fxp = checked_eval(f, probe);
    probe(m) = orig - step;
    const double fxm = checked_eval(f, probe);
    probe(m) = orig + I * step;
    const double fyp = checked_eval(f, probe);
    probe(m) = orig - I * step;
    const double fym = checked_eval(f, probe);
    probe(m) = orig;
    const double dx = (fxp - fxm) / (2.0 * step);
    const double dy = (fyp - fym) / (2.0 * step);
    out.d_psi(m) = 0.5 * std::complex<double>(dx, -dy);
    out.d_conj(m) = 0.5 * std::complex<double>(dx, dy);
  }
  return out;
}

VectorXc wirtinger_gradient(const HomogeneousObservable& obs, const VectorXc& psi) {
  require_nonzero(psi, "wirtinger_gradient");
  if (obs.analytic_gradient()) return checked_gradient(*obs.analytic_gradient(), psi);
  const double h = 1e-5 * (1.0 + psi.norm());
  return numeric_wirtinger([&obs](const VectorXc& v) { return obs(v); }, psi, h).d_conj;
}

VectorXc wirtinger_gradient(const HomogeneousObservable& obs, const StateVector& psi) {
  return wirtinger_gradient(obs, psi.amplitudes());
}

namespace {

MatrixXc stencil_hessian(const HomogeneousObservable& obs, const VectorXc& psi, double h) {
  const Index n = psi.size();
  auto grad = [&obs](const VectorXc& v) { return wirtinger_gradient(obs, v); };
  MatrixXc hess(n, n);
  const std::complex<double> I(0.0, 1.0);
  for (Index k = 0; k < n; ++k) {
    VectorXc e = VectorXc::Zero(n);
    e(k) = 1.0;
    const VectorXc dx = directional_derivative(grad, psi, e, h);
    const VectorXc dy = directional_derivative(grad, psi, VectorXc(I * e), h);
    hess.col(k) = 0.5 * (dx - I * dy);
  }
  return hess;
}

HermitianOperator checked_hermitian(const HomogeneousObservable& obs, const MatrixXc& raw) {
  // Gate relative to the operator scale so that large energies are not penalized.
  const double scale = std::max(1.0, raw.cwiseAbs().maxCoeff());
  const double r = hermiticity_residual(raw);
  if (r > kHessianHermitianGate * scale)
    throw NotHermitianError("nonlinear_operator: Hessian of '" + obs.label() + "' is not Hermitian", r);
  return HermitianOperator(MatrixXc((raw + raw.adjoint()) / 2.0));
}

// A (0,0)-homogeneous result calls for a step proportional to |psi|. Numerical
// gradients are noisier, so they get a wider outer stencil.
double base_step(const HomogeneousObservable& obs, const VectorXc& psi) {
  return (obs.analytic_gradient() ? 1e-3 : 1e-2) * psi.norm();
}

}  // namespace

MatrixXc nonlinear_operator_raw(const HomogeneousObservable& obs, const VectorXc& psi) {
  require_nonzero(psi, "nonlinear_operator");
  if (obs.analytic_hessian()) return (*obs.analytic_hessian())(psi);
  return stencil_hessian(obs, psi, base_step(obs, psi));
}

HermitianOperator nonlinear_operator(const HomogeneousObservable& obs, const VectorXc& psi) {
  require_nonzero(psi, "nonlinear_operator");
  if (obs.analytic_hessian()) return checked_hermitian(obs, (*obs.analytic_hessian())(psi));
  // The gradient is degree one in psi, so the exact Hessian maps psi onto it.
  // Near a singular set the curvature varies on scales shorter than the default
  // stencil; a large Euler or Hermiticity residual then triggers a ladder of halved
  // steps, and the Richardson estimate whose inputs agree best is kept.
  const VectorXc grad = wirtinger_gradient(obs, psi);
  double h = base_step(obs, psi);
  MatrixXc raw;
  bool reached_guard = false;
  try {
    raw = stencil_hessian(obs, psi, h);
  } catch (const SingularityError&) {
    if (!obs.analytic_gradient()) throw;
    reached_guard = true;
  }
  auto inaccurate = [&](const MatrixXc& m) {
    const double scale = psi.norm() * std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m * psi - grad).norm() > 1e-3 * kHessianHermitianGate * scale ||
           hermiticity_residual(m) > 1e-3 * kHessianHermitianGate * scale;
  };
  if (reached_guard || (obs.analytic_gradient() && inaccurate(raw))) {
    std::optional<MatrixXc> prev, best;
    double best_change = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 40; ++i) {
      h /= 2;
      MatrixXc cur;
      try {
        cur = stencil_hessian(obs, psi, h);
      } catch (const SingularityError&) {
        prev.reset();  // the stencil still reaches into the guard band
        continue;
      }
      if (prev) {
        const double change = (cur - *prev).cwiseAbs().maxCoeff() / std::max(1.0, cur.cwiseAbs().maxCoeff());
        if (change < best_change) {
          best_change = change;
          best = (4.0 * cur - *prev) / 3.0;
        }
      }
      prev = cur;
    }
    if (!best) throw SingularityError("nonlinear_operator: no stencil around psi avoids the guard band of '" +
                                      obs.label() + "'");
    raw = *best;
  }
  return checked_hermitian(obs, raw);
}

HermitianOperator nonlinear_operator(const HomogeneousObservable& obs, const StateVector& psi) {
  return nonlinear_operator(obs, psi.amplitudes());
}

std::complex<double> star_product(const HomogeneousObservable& a, const HomogeneousObservable& b,
                                  const VectorXc& psi) {
  // dA/dpsi_m = conj(dA/dconj psi_m) for real A, and Eigen's dot conjugates its left side.
  return wirtinger_gradient(a, psi).dot(wirtinger_gradient(b, psi));
}

HomogeneousObservable star_observable(const HomogeneousObservable& a, const HomogeneousObservable& b) {
  auto eval = [a, b](const VectorXc& psi) {
    const auto v = star_product(a, b, psi);
    if (std::abs(v.imag()) > 1e-8 * std::max(1.0, std::abs(v)))
      throw NotHermitianError("star product " + a.label() + "*" + b.label() + " is complex at psi = " + describe(psi),
                              std::abs(v.imag()));
    return v.real();
  };
  return HomogeneousObservable(a.label() + "*" + b.label(), eval);
}

double barstar_moment(const HomogeneousObservable& a, const VectorXc& psi, int k) {
  if (k < 1) throw Error("barstar_moment: k must be >= 1");
  const MatrixXc m = nonlinear_operator(a, psi).matrix();
  VectorXc v = psi;
  for (int i = 0; i < k; ++i) v = m * v;
  const auto r = psi.dot(v) / psi.squaredNorm();
  if (std::abs(r.imag()) > 1e-8 * std::max(1.0, std::abs(r)))
    throw NotHermitianError("barstar_moment: complex moment", std::abs(r.imag()));
  return r.real();
}

// ---------------------------------------------------------------------------

namespace catalog {

HomogeneousObservable bilinear(const MatrixXc& m, std::string label) {
  if (m.rows() != m.cols()) throw DimensionError("bilinear: matrix must be square");
  const double r = hermiticity_residual(m);
  if (r > tolerance::hermitian) throw NotHermitianError("bilinear", r);
  auto eval = [m](const VectorXc& psi) { return psi.dot(m * psi).real(); };
  auto grad = [m](const VectorXc& psi) -> VectorXc { return m * psi; };
  return HomogeneousObservable(std::move(label), eval, grad);
}

HomogeneousObservable norm_squared(Index dim) {
  return bilinear(MatrixXc::Identity(dim, dim), "n");
}

HomogeneousObservable power_family(const MatrixXc& h0, const MatrixXc& k, double coupling, int power,
                                   std::string label) {
  if (h0.rows() != k.rows() || h0.cols() != k.cols() || h0.rows() != h0.cols())
    throw DimensionError("power_family: H0 and K must be square and of equal size");
  if (power < 1) throw Error("power_family: power must be >= 1");
  if (hermiticity_residual(h0) > tolerance::hermitian || hermiticity_residual(k) > tolerance::hermitian)
    throw NotHermitianError("power_family", std::max(hermiticity_residual(h0), hermiticity_residual(k)));
  const double p = power;
  auto eval = [=](const VectorXc& psi) {
    const double n = psi.squaredNorm();
    const double s = psi.dot(k * psi).real();
    return psi.dot(h0 * psi).real() + coupling * std::pow(s, p) / std::pow(n, p - 1.0);
  };
  auto grad = [=](const VectorXc& psi) -> VectorXc {
    const double n = psi.squaredNorm();
    const double s = psi.dot(k * psi).real();
    return h0 * psi + coupling * (p * std::pow(s, p - 1.0) / std::pow(n, p - 1.0) * (k * psi) -
                                  (p - 1.0) * std::pow(s, p) / std::pow(n, p) * psi);
  };
  return HomogeneousObservable(std::move(label), eval, grad);
}

namespace {
MatrixXc diag2(double a, double b) {
  MatrixXc m = MatrixXc::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}
HomogeneousObservable with_params(HomogeneousObservable obs, std::map<std::string, double> params) {
  return HomogeneousObservable(obs.label(), [obs](const VectorXc& v) { return obs(v); }, obs.analytic_gradient(),
                               std::move(params));
}
}  // namespace

HomogeneousObservable canonical(double e1, double e2, double eps) {
  return with_params(power_family(diag2(e1, e2), pauli(3), eps, 2, "canonical"),
                     {{"E1", e1}, {"E2", e2}, {"eps", eps}, {"power", 2}});
}

HomogeneousObservable canonical_degenerate(double e, double eps) {
  return with_params(power_family(diag2(e, e), pauli(3), eps, 2, "canonical"),
                     {{"E", e}, {"E1", e}, {"E2", e}, {"eps", eps}, {"power", 2}});
}

HomogeneousObservable cubic(double e1, double e2, double eps) {
  return with_params(power_family(diag2(e1, e2), pauli(3), eps, 3, "cubic"),
                     {{"E1", e1}, {"E2", e2}, {"eps", eps}, {"power", 3}});
}

HomogeneousObservable power_2n(double e1, double e2, double eps, int n) {
  if (n < 1) throw Error("power_2n: N must be >= 1");
  return with_params(power_family(diag2(e1, e2), pauli(3), eps, 2 * n, "power_2N"),
                     {{"E1", e1}, {"E2", e2}, {"eps", eps}, {"N", double(n)}, {"power", 2.0 * n}});
}

HomogeneousObservable singular() {
  const MatrixXc k = pauli(3);
  auto guard = [](double s, double n, const VectorXc& psi) {
    if (std::abs(s) < kSingularGuard * n)
      throw SingularityError("n^2/<sigma3> evaluated within the guard band |<sigma3>|/n < 1e-6 at psi = " +
                             describe(psi));
  };
  auto eval = [k, guard](const VectorXc& psi) {
    const double n = psi.squaredNorm();
    const double s = psi.dot(k * psi).real();
    guard(s, n, psi);
    return n * n / s;
  };
  auto grad = [k, guard](const VectorXc& psi) -> VectorXc {
    const double n = psi.squaredNorm();
    const double s = psi.dot(k * psi).real();
    guard(s, n, psi);
    return 2.0 * n / s * psi - n * n / (s * s) * (k * psi);
  };
  auto hess = [k, guard](const VectorXc& psi) -> MatrixXc {
    const double n = psi.squaredNorm();
    const double s = psi.dot(k * psi).real();
    guard(s, n, psi);
    const VectorXc kp = k * psi;
    const Index d = psi.size();
    return 2 * n / s * MatrixXc::Identity(d, d) + 2 / s * psi * psi.adjoint() -
           2 * n / (s * s) * (psi * kp.adjoint() + kp * psi.adjoint()) + 2 * n * n / (s * s * s) * kp * kp.adjoint() -
           n * n / (s * s) * k;
  };
  return HomogeneousObservable("singular", eval, grad).with_hessian(hess);
}

namespace {

struct LiftLayout {
  Index d_sub, d_rest;
  SubsystemSlot slot;
  Dims dims() const { return slot == SubsystemSlot::first ? Dims{d_sub, d_rest} : Dims{d_rest, d_sub}; }
  std::size_t rest_slot() const { return slot == SubsystemSlot::first ? 1 : 0; }
  Index at(Index a, Index r) const { return slot == SubsystemSlot::first ? a * d_rest + r : r * d_sub + a; }
};

}  // namespace

HomogeneousObservable weinberg_lift(const HomogeneousObservable& h_sub, Index d_sub, Index d_rest,
                                    const MatrixXc& rest_basis, SubsystemSlot slot) {
  if (d_sub <= 0 || d_rest <= 0) throw DimensionError("weinberg_lift: dimensions must be positive");
  if (rest_basis.rows() != d_rest) throw DimensionError("weinberg_lift: rest basis has the wrong dimension");
  require_unitary(rest_basis, "weinberg_lift");
  const LiftLayout lay{d_sub, d_rest, slot};
  const MatrixXc u_adj = rest_basis.adjoint();

  auto slices = [lay, u_adj](const VectorXc& psi) {
    if (psi.size() != lay.d_sub * lay.d_rest) throw DimensionError("weinberg_lift: state has the wrong dimension");
    const VectorXc primed = apply_on_factor(psi, u_adj, lay.dims(), lay.rest_slot());
    std::vector<VectorXc> out(lay.d_rest, VectorXc(lay.d_sub));
    for (Index r = 0; r < lay.d_rest; ++r)
      for (Index a = 0; a < lay.d_sub; ++a) out[r](a) = primed(lay.at(a, r));
    return out;
  };

  auto eval = [h_sub, slices](const VectorXc& psi) {
    double total = 0.0;
    for (const auto& phi : slices(psi))
      if (phi.squaredNorm() >= kSliceNormFloor) total += h_sub(phi);
    return total;
  };

  std::optional<HomogeneousObservable::Gradient> grad;
  if (h_sub.analytic_gradient()) {
    const auto sub_grad = *h_sub.analytic_gradient();
    const MatrixXc u = rest_basis;
    grad = [lay, u, sub_grad, slices](const VectorXc& psi) -> VectorXc {
      const auto phis = slices(psi);
      VectorXc primed = VectorXc::Zero(psi.size());
      for (Index r = 0; r < lay.d_rest; ++r) {
        if (phis[r].squaredNorm() < kSliceNormFloor) continue;
        const VectorXc g = sub_grad(phis[r]);
        for (Index a = 0; a < lay.d_sub; ++a) primed(lay.at(a, r)) = g(a);
      }
      return apply_on_factor(primed, u, lay.dims(), lay.rest_slot());
    };
  }
  return HomogeneousObservable("weinberg(" + h_sub.label() + ")", eval, grad, h_sub.params());
}

HomogeneousObservable density_functional(const Dims& dims, std::size_t slot, double energy, const MatrixXc& k,
                                         double coupling, DensityVariant variant) {
  detail::check_slot(dims, slot);
  if (k.rows() != dims[slot] || k.cols() != dims[slot])
    throw DimensionError("density_functional: weight operator does not match the factor dimension");
  if (hermiticity_residual(k) > tolerance::hermitian)
    throw NotHermitianError("density_functional", hermiticity_residual(k));
  const bool weighted = variant == DensityVariant::purity_weighted;

  auto eval = [=](const VectorXc& psi) {
    const MatrixXc rho = reduce_pure(psi, dims, slot);
    const double n = rho.trace().real();
    const double t = (rho * k).trace().real();
    double f = coupling * t * t / n;
    if (weighted) f *= (rho * rho).trace().real() / (n * n);
    return energy * n + f;
  };
  auto grad = [=](const VectorXc& psi) -> VectorXc {
    const MatrixXc rho = reduce_pure(psi, dims, slot);
    const Index d = rho.rows();
    const MatrixXc id = MatrixXc::Identity(d, d);
    const double n = rho.trace().real();
    const double t = (rho * k).trace().real();
    // dF = Tr(G d rho)
    MatrixXc g = coupling * (2.0 * t / n * k - t * t / (n * n) * id);
    if (weighted) {
      const double pur = (rho * rho).trace().real();
      const double f = coupling * t * t / n;
      g = g * (pur / (n * n)) + f * (2.0 / (n * n) * rho - 2.0 * pur / (n * n * n) * id);
    }
    g += energy * id;
    return apply_on_factor(psi, g, dims, slot);
  };
  const std::string name = weighted ? "density(purity-weighted)" : "density(plain)";
  return HomogeneousObservable(name, eval, grad, {{"E", energy}, {"c", coupling}});
}

}  // namespace catalog

}  // namespace nlqm
