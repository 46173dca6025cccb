#pragma once

// Three notions of a measured value for a nonlinear observable: eigenvalues
// (dH/d conj psi = lambda psi), diagonal values (spectrum of H-hat(psi)) and
// eigenfrequencies of a trajectory. Plus the moment-based probability
// assignments for the degenerate canonical family.

#include <string>
#include <vector>

#include "nlqm/core.hpp"
#include "nlqm/dynamics.hpp"
#include "nlqm/observables.hpp"

namespace nlqm {

struct EigenstateRecord {
  double lambda;
  StateVector state;  ///< normalized, gauge-fixed
  double residual;    ///< |dH/d conj psi - lambda psi|
  /// True when the state is one point of a continuous family of eigenstates
  /// with the same lambda that differ only in relative phases.
  bool phase_orbit = false;
};

struct EigenSearchOptions {
  int amplitude_steps = 32;  ///< seeds in theta over [0, pi/2]
  int phase_steps = 16;      ///< seeds in the relative phase over [0, 2 pi)
  int max_iterations = 80;
  double accept_residual = 1e-10;
  double merge_fidelity = 1.0 - 1e-8;
};

struct EigenSearchResult {
  std::vector<EigenstateRecord> eigenstates;  ///< ascending in lambda
  int seeds = 0;
  int failed_seeds = 0;  ///< seeds whose refinement did not converge
};

/// Multistart Gauss-Newton on the real system {g - lambda psi = 0, |psi|^2 = 1,
/// Im psi_j = 0}. For dim 2 the seeds are (cos t, e^{i f} sin t) on the grid; for
/// larger dims the same number of seeds is drawn from a fixed-seed generator.
/// Solutions are merged when their fidelity exceeds merge_fidelity or when they
/// lie on one relative-phase orbit.
EigenSearchResult find_eigenstates(const HomogeneousObservable& obs, Index dim, const EigenSearchOptions& options = {});

/// Eigenvalues of H-hat(psi), ascending.
std::vector<double> diagonal_values(const HomogeneousObservable& obs, const StateVector& psi);

struct FrequencyComponent {
  Index component;
  double omega;   ///< psi_k ~ exp(-i omega t)
  double weight;  ///< time-averaged |psi_k|^2
  std::string method;  ///< "phase" or "fourier"
};

/// Dominant frequency of every amplitude of a trajectory sampled on a uniform
/// grid with all states stored. Components with constant modulus use phase
/// unwrapping with a least-squares slope; others use a windowed Fourier peak,
/// which needs 2 pi / T <= tolerance. Components with weight below 1e-14 are
/// skipped.
std::vector<FrequencyComponent> eigenfrequencies(const Trajectory& traj, double tolerance = 1e-6);

enum class MomentMethod { first_moment, star_square };

struct ProbabilitySet {
  std::string method;
  std::vector<double> values;         ///< {E + eps, E}
  std::vector<double> probabilities;  ///< matching values
};

struct MomentProbabilities {
  ProbabilitySet requested;
  ProbabilitySet other;
  /// p_{E+eps}(requested) - p_{E+eps}(other)
  double discrepancy;
};

/// For the degenerate canonical family (params E, eps): probabilities of the two
/// eigenvalues E + eps and E fitted to the first moment A/n, or to the star
/// square (A*A)/n. The two disagree in general.
MomentProbabilities moment_probabilities(const HomogeneousObservable& obs, const StateVector& psi,
                                         MomentMethod method);

/// Closed forms of the two methods as functions of s = <sigma3>/n.
double first_moment_probability(double s);
double star_square_probability(double e, double eps, double s);

struct SinusoidFit {
  double amplitude;  ///< non-negative
  double omega;      ///< non-negative
  double phase;      ///< y = offset + amplitude sin(omega t + phase)
  double offset;
  double max_residual;
};

/// Least-squares sinusoid. The frequency is seeded from a zero-padded
/// periodogram and refined jointly with the linear coefficients.
SinusoidFit fit_sinusoid(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace nlqm
