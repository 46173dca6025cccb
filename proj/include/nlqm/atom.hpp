#pragma once

// A K-level atom coupled to one truncated field mode, with a nonlinearity on the
// atomic levels. Amplitudes psi_{k n} (level k, n photons) are stored with the
// atom as the first tensor factor: index = k (n_max + 1) + n, levels counted from
// zero in code (level 0 here is the ground level "1").

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "nlqm/core.hpp"
#include "nlqm/dynamics.hpp"
#include "nlqm/observables.hpp"

namespace nlqm {

struct AtomFieldParams {
  std::vector<double> omega_levels{0.0, 1.0};
  std::vector<double> eps_levels{0.0, 0.0};
  double omega = 1.0;            ///< field frequency
  std::complex<double> q{1.0};   ///< coupling; q conj(q) replaces q^2 when complex
  int n_max = 4;                 ///< Fock truncation

  Index levels() const { return static_cast<Index>(omega_levels.size()); }
  Dims dims() const { return {levels(), static_cast<Index>(n_max) + 1}; }
  double omega0() const { return omega_levels.at(1) - omega_levels.at(0); }
  double eps0() const { return eps_levels.at(1) - eps_levels.at(0); }
  double detuning() const { return omega0() - omega; }
  /// epsilon = 2 eps0^2
  double epsilon() const { return 2 * eps0() * eps0(); }
  /// varsigma with epsilon^2 / 8 = 2 varsigma^2
  double varsigma() const { return epsilon() / 4; }
  /// Detuning shifted by the nonlinearity for two-level initial conditions.
  double detuning_prime() const;
  /// Omega^2 = |q|^2 (N + 1/2)
  double rabi(double n_plus_half) const { return std::abs(q) * std::sqrt(n_plus_half); }

  void validate() const;
};

enum class AtomDescription { polchinski, weinberg_fock };

struct AtomFieldModel {
  HomogeneousObservable hamiltonian;  ///< whole Hamiltonian function
  OperatorBuilder builder;            ///< generator of its flow
  MatrixXc linear;                    ///< the linear part
  AtomFieldParams params;
  AtomDescription description;
};

/// Linear part sum_k w_k b_k^+ b_k + w a^+ a + (i q/2)(b_2^+ b_1 a - a^+ b_1^+ b_2)
/// plus the nonlinear part:
///   polchinski:    <e (x) 1>^2 / n
///   weinberg_fock: sum_n <e P_n>^2 / <P_n> (empty photon slices contribute 0)
AtomFieldModel build_atom_field(AtomDescription desc, const AtomFieldParams& p);

/// The truncated linear Jaynes-Cummings matrix alone.
MatrixXc jaynes_cummings_matrix(const AtomFieldParams& p);

/// Basis state with the atom on `level` (0-based) and `photons` photons.
StateVector fock_state(const AtomFieldParams& p, Index level, Index photons);

struct InversionSeries {
  std::vector<double> times;
  std::vector<double> w;  ///< 2 <R3> = p(level 1) - p(level 0), normalized
  std::string regime;     ///< "linear", "Omega>sigma", "Omega=sigma", "Omega<sigma"
  double n_mean = 0;      ///< <N> = <R3 + a^+ a> at t = 0
  double n_drift = 0;     ///< max |<N>(t) - <N>(0)|
  double norm_drift = 0;
  double h_drift = 0;
  double max_top_fock = 0;
  /// K > 2 only: unwrapped phase of each initially populated psi_{k n}, k >= 2,
  /// keyed "phase_k<k>_n<n>".
  std::map<std::string, std::vector<double>> level_phases;
  std::map<std::string, std::vector<double>> level_moduli;
};

/// Population of the top Fock level allowed during a run.
inline constexpr double kTruncationLeak = 1e-8;

InversionSeries inversion_trajectory(const AtomFieldModel& model, const StateVector& psi0, double t_end, double dt);

/// -cn(Omega t, s/Omega), -sech(Omega t) or -dn(s t, Omega/s) for w(0) = -1,
/// resonant primed detuning.
double elliptic_inversion(double omega, double varsigma, double t);
std::string inversion_regime(double omega, double varsigma);

struct OdeResidual {
  double linf = 0;
  double step = 0;
  std::size_t samples = 0;
};

/// Second differences of w against
///   w'' = 2 D'(D' n' + e/8) + (e (D' n' + e/8) - D'^2 - |q|^2 (N + 1/2)) w
///         - (3/4) e D' w^2 - (e^2/8) w^3
/// with D' = detuning_prime(), e = epsilon(), n' the initial R3 eigenvalue and N
/// the eigenvalue of R3 + a^+ a.
OdeResidual inversion_ode_check(const InversionSeries& series, const AtomFieldParams& p, double n_prime, double n);

}  // namespace nlqm
