#pragma once

// Two rival descriptions of a composite system with a nonlinear part:
// basis-dependent Weinberg lifts and Polchinski functionals of the reduced
// density matrix. The telegraph experiments, the no-signaling comparison and
// the intention paradox are built on them.

#include <string>
#include <vector>

#include "nlqm/core.hpp"
#include "nlqm/dynamics.hpp"
#include "nlqm/observables.hpp"

namespace nlqm {

/// psi -> sum_r h(Phi^(r)) over slices of (U^dagger on the rest factor) psi; the
/// subsystem is the first factor.
HomogeneousObservable weinberg_composite(const HomogeneousObservable& h_sub, Index d_sub, Index d_rest,
                                         const MatrixXc& rest_basis);

enum class DescriptionKind { weinberg, polchinski };

struct CompositeDescription {
  DescriptionKind kind = DescriptionKind::weinberg;
  catalog::DensityVariant variant = catalog::DensityVariant::plain;  ///< polchinski only
  MatrixXc rest_basis = MatrixXc::Identity(2, 2);                    ///< weinberg only
};

/// Whole-system Hamiltonian function on 2 (x) 2 with a linear first factor and a
/// nonlinear second factor: E1 n + H2, where H2 carries E2 n + eps <sigma3>^2 / n
/// either as a Weinberg lift over first-factor slices or as the density
/// functional of the second factor.
HomogeneousObservable two_qubit_hamiltonian(const CompositeDescription& desc, double e1, double e2, double eps);

/// (|+-> - |-+>)/sqrt(2), dims [2, 2].
StateVector singlet();

/// [[alpha, beta], [-conj beta, conj alpha]]; |alpha|^2 + |beta|^2 must be 1 within 1e-10.
MatrixXc sender_matrix(std::complex<double> alpha, std::complex<double> beta);

// ---------------------------------------------------------------------------

struct DensityTrajectory {
  std::vector<double> times;
  std::vector<MatrixXc> rho;
  std::map<std::string, std::vector<double>> recorded;
};

/// d rho_kl/dt = -2i (Tr rho e / Tr rho)(e_k - e_l) rho_kl, times
/// Tr(rho^2)/(Tr rho)^2 for the purity-weighted variant. Tr rho, Tr(rho e) and
/// Tr(rho^2) are checked against their initial values after every step (1e-9).
/// Records "trace", "mean_eps", "purity", and "re_rho01", "im_rho01",
/// "phase01" (unwrapped arg rho_01).
DensityTrajectory polchinski_reduced_flow(catalog::DensityVariant variant, const HermitianOperator& epshat,
                                          const DensityMatrix& rho0, double t_end, double dt);

/// Angular rate of arg rho_kl under the reduced flow, from the generator.
double coherence_rate(catalog::DensityVariant variant, const HermitianOperator& epshat, const DensityMatrix& rho,
                      Index k, Index l);

// ---------------------------------------------------------------------------

struct TelegraphParams {
  std::complex<double> alpha{1.0, 0.0};
  std::complex<double> beta{0.0, 0.0};
  double eps = 0.1;
  double e1 = 0.0;
  double e2 = 0.0;

  double x() const { return std::norm(beta) - std::norm(alpha); }
};

struct TelegraphReport {
  std::vector<double> times;
  std::vector<double> signal;    ///< numeric <sigma2> of the receiving subsystem
  std::vector<double> analytic;  ///< closed form (empty when none applies)
  double linf_error = 0;         ///< max |signal - analytic|
  double signal_amplitude = 0;   ///< fitted amplitude of the numeric signal
  double signal_omega = 0;       ///< fitted angular frequency
  double expected_amplitude = 0;
  double expected_omega = 0;
  double norm_drift = 0;
  double h_drift = 0;
  /// mobility only: max |<sigma1>|, max |<sigma3>| of the linear subsystem
  double max_abs_sigma1 = 0, max_abs_sigma3 = 0;
  /// mobility only: max entrywise |rho1 - 1/2|
  double max_dev_from_mixed = 0;
};

/// Weinberg composite E1 n + sum over first-factor slices of (E2 n + eps <s3>^2/n)
/// from (M (x) 1) singlet, M = sender_matrix(alpha, beta). Slicing the rotated
/// singlet in the standard basis is the same as slicing the singlet in the
/// sender's basis. Closed form: <s2>_II = 2 Re(conj(alpha) beta) sin(4 eps (|a|^2 - |b|^2) t).
TelegraphReport gisin_telegraph(const TelegraphParams& p, double t_end, double dt);

/// (|1> (x) phi + |2> (x) phi') / sqrt(2) with phi = (cos th/2, sin th/2) and
/// phi' = (-sin th/2, cos th/2), nonlinear second factor eps <s3>^2/n lifted over
/// first-factor slices. The first factor's <s2> oscillates as
/// -sin th sin(4 eps cos th t).
TelegraphReport mobility_telegraph(double eps, double theta, double t_end, double dt);

struct NoSignalingReport {
  std::vector<double> times;
  std::vector<double> deviation;  ///< max entrywise |rho_II - rho_II'| per time
  double max_deviation = 0;
};

/// Evolves the singlet and (remote_u (x) 1) singlet under `h_total` and compares
/// the reduced matrices of the second factor.
NoSignalingReport no_signaling_check(const HomogeneousObservable& h_total, const MatrixXc& remote_u, double t_end,
                                     double dt);

/// The singlet's second-factor ensemble read off in two first-factor bases: the
/// standard one and the basis of sender_matrix(alpha, beta). Both ensembles give
/// the same mixture (1/2).
struct TwoDecomposition {
  std::vector<double> weights_a, weights_b;
  std::vector<VectorXc> states_a, states_b;  ///< normalized
  MatrixXc mixture_a, mixture_b;
};
TwoDecomposition gisin_decompositions(std::complex<double> alpha, std::complex<double> beta);

// ---------------------------------------------------------------------------

struct ParadoxParams {
  double lambda1 = 1.0, lambda2 = 0.0;
  double f = 1.0;
  double t = 0.0;
};

struct ParadoxReport {
  std::vector<double> times;
  std::vector<MatrixXc> rho;
  std::vector<MatrixXc> analytic;
  double max_deviation = 0;  ///< max entrywise |rho - analytic|
  double max_sigma1_drift = 0;
  double sigma3_initial = 0, sigma3_final = 0;  ///< Tr(rho s3)
  double p_up_initial = 0, p_up_final = 0;      ///< Tr(rho P+)
  /// max |Tr(rho(t) P+) - Tr(rho0 P+(t))| with P+(t) from the Heisenberg picture
  double heisenberg_mismatch = 0;
};

/// rho0 = l1 (1/2) + l2 [[3/4, 1/4], [1/4, 1/4]], i rho' = 2 f (Tr rho s1/Tr rho)[s1, rho],
/// integrated to p.t and compared with
/// rho(t) = (l1/2) 1 + (l2/4)(2 + s1 + s3 cos(2 l2 f t) - s2 sin(2 l2 f t)).
ParadoxReport intention_paradox(const ParadoxParams& p, double dt);

MatrixXc paradox_analytic(const ParadoxParams& p, double t);
/// P+-(t) = (1 +- (s3 cos(2 l2 f t) + s2 sin(2 l2 f t)))/2
MatrixXc paradox_projector(const ParadoxParams& p, double t, int sign);

}  // namespace nlqm
