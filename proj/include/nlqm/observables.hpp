#pragma once

// (1,1)-homogeneous observables A(psi, conj psi), their Wirtinger derivatives,
// the induced state-dependent operators A_mn = d^2 A / d conj(psi_m) d psi_n and
// the star products built from them.

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "nlqm/core.hpp"

namespace nlqm {

/// Real functional of the amplitudes obeying A(l psi) = |l|^2 A(psi).
///
/// The evaluator receives the amplitude vector; conjugates are implied. An
/// analytic gradient, when supplied, must return dA/d conj(psi_m) and takes
/// precedence over numerical differentiation. Likewise an analytic Hessian
/// d^2 A / d conj(psi_m) d psi_n.
class HomogeneousObservable {
 public:
  using Evaluator = std::function<double(const VectorXc&)>;
  using Gradient = std::function<VectorXc(const VectorXc&)>;
  using Hessian = std::function<MatrixXc(const VectorXc&)>;

  HomogeneousObservable(std::string label, Evaluator evaluator, std::optional<Gradient> gradient = std::nullopt,
                        std::map<std::string, double> params = {})
      : label_(std::move(label)),
        evaluator_(std::move(evaluator)),
        gradient_(std::move(gradient)),
        params_(std::move(params)) {}

  double operator()(const VectorXc& psi) const { return evaluator_(psi); }
  double operator()(const StateVector& psi) const { return evaluator_(psi.amplitudes()); }

  const std::string& label() const noexcept { return label_; }
  const std::optional<Gradient>& analytic_gradient() const noexcept { return gradient_; }
  const std::optional<Hessian>& analytic_hessian() const noexcept { return hessian_; }
  HomogeneousObservable with_hessian(Hessian hessian) const {
    HomogeneousObservable out = *this;
    out.hessian_ = std::move(hessian);
    return out;
  }
  const std::map<std::string, double>& params() const noexcept { return params_; }
  /// Throws ConfigError when the family parameter is absent.
  double param(const std::string& name) const;

 private:
  std::string label_;
  Evaluator evaluator_;
  std::optional<Gradient> gradient_;
  std::optional<Hessian> hessian_;
  std::map<std::string, double> params_;
};

/// dA / d conj(psi_m). Uses the analytic gradient when present, otherwise central
/// differences in the 2d real coordinates with step 1e-5 (1 + |psi|).
VectorXc wirtinger_gradient(const HomogeneousObservable& obs, const VectorXc& psi);
VectorXc wirtinger_gradient(const HomogeneousObservable& obs, const StateVector& psi);

/// Both Wirtinger derivatives (dA/dpsi, dA/dconj psi) of an arbitrary real
/// functional by central differences.
struct WirtingerPair {
  VectorXc d_psi;
  VectorXc d_conj;
};
WirtingerPair numeric_wirtinger(const HomogeneousObservable::Evaluator& f, const VectorXc& psi, double step);

/// Raw (unsymmetrized) d^2 A / d conj(psi_m) d psi_n.
MatrixXc nonlinear_operator_raw(const HomogeneousObservable& obs, const VectorXc& psi);

/// The Hermitian operator A-hat(psi) with <psi|A-hat psi> = A(psi). The raw
/// Hessian must be Hermitian to 1e-8 before it is symmetrized.
HermitianOperator nonlinear_operator(const HomogeneousObservable& obs, const VectorXc& psi);
HermitianOperator nonlinear_operator(const HomogeneousObservable& obs, const StateVector& psi);

inline constexpr double kHessianHermitianGate = 1e-8;

/// A*B = sum_m (dA/dpsi_m)(dB/dconj psi_m) = <psi|A-hat B-hat psi>.
std::complex<double> star_product(const HomogeneousObservable& a, const HomogeneousObservable& b,
                                  const VectorXc& psi);

/// A*B as an observable. Only defined where the product is real; evaluating
/// where Im(A*B) exceeds 1e-8 (relative) throws.
HomogeneousObservable star_observable(const HomogeneousObservable& a, const HomogeneousObservable& b);

/// <psi|A-hat^k psi> / <psi|psi>, A-hat evaluated at psi.
double barstar_moment(const HomogeneousObservable& a, const VectorXc& psi, int k);

// ---------------------------------------------------------------------------

namespace catalog {

/// <psi|M psi>
HomogeneousObservable bilinear(const MatrixXc& m, std::string label = "bilinear");

/// n = <psi|psi>, the unit of the star product.
HomogeneousObservable norm_squared(Index dim);

/// <psi|H0 psi> + c <psi|K psi>^p / n^(p-1)
HomogeneousObservable power_family(const MatrixXc& h0, const MatrixXc& k, double coupling, int power,
                                   std::string label = "power");

/// <psi|diag(E1,E2) psi> + eps <sigma3>^2 / n
HomogeneousObservable canonical(double e1, double e2, double eps);
/// E n + eps <sigma3>^2 / n; params E, eps.
HomogeneousObservable canonical_degenerate(double e, double eps);
/// <psi|diag(E1,E2) psi> + eps <sigma3>^3 / n^2
HomogeneousObservable cubic(double e1, double e2, double eps);
/// <psi|diag(E1,E2) psi> + eps <sigma3>^(2N) / n^(2N-1)
HomogeneousObservable power_2n(double e1, double e2, double eps, int n);

/// n^2 / <sigma3>; guarded on |<sigma3>|/n < 1e-6.
HomogeneousObservable singular();
inline constexpr double kSingularGuard = 1e-6;

/// Weinberg lift of a subsystem observable to a two-factor space:
/// psi -> sum_r h(Phi^(r)), Phi^(r) the r-th slice of (1 (x) U^dagger) psi over the
/// rest factor. Slices with squared norm below 1e-14 contribute nothing.
enum class SubsystemSlot { first, second };
HomogeneousObservable weinberg_lift(const HomogeneousObservable& h_sub, Index d_sub, Index d_rest,
                                    const MatrixXc& rest_basis, SubsystemSlot slot = SubsystemSlot::first);
inline constexpr double kSliceNormFloor = 1e-14;

/// Functional of the reduced density matrix rho of factor `slot`:
///   plain:           E Tr rho + c (Tr rho K)^2 / Tr rho
///   purity_weighted: E Tr rho + c (Tr rho K)^2 / Tr rho * Tr(rho^2) / (Tr rho)^2
enum class DensityVariant { plain, purity_weighted };
HomogeneousObservable density_functional(const Dims& dims, std::size_t slot, double energy, const MatrixXc& k,
                                         double coupling, DensityVariant variant);

}  // namespace catalog

}  // namespace nlqm
