#include "nlqm/atom.hpp"

#include <cmath>
#include <sstream>

namespace nlqm {

namespace {

const std::complex<double> I(0.0, 1.0);

double drift(const std::vector<double>& s) {
  double d = 0;
  for (double v : s) d = std::max(d, std::abs(v - s.front()));
  return d;
}

}  // namespace

double AtomFieldParams::detuning_prime() const {
  const double e1 = eps_levels.at(0), e2 = eps_levels.at(1);
  return detuning() + e2 * e2 - e1 * e1;
}

void AtomFieldParams::validate() const {
  if (omega_levels.size() < 2) throw ConfigError("atom: at least two levels are required");
  if (eps_levels.size() != omega_levels.size())
    throw ConfigError("atom: eps_levels must have one entry per level");
  if (n_max < 1) throw ConfigError("atom: n_max must be at least 1");
  for (double x : omega_levels)
    if (!std::isfinite(x)) throw ConfigError("atom: non-finite level frequency");
  for (double x : eps_levels)
    if (!std::isfinite(x)) throw ConfigError("atom: non-finite nonlinearity weight");
  if (!std::isfinite(omega) || !std::isfinite(std::abs(q))) throw ConfigError("atom: non-finite field parameter");
}

MatrixXc jaynes_cummings_matrix(const AtomFieldParams& p) {
  p.validate();
  const Index nf = p.n_max + 1;
  const Index dim = p.levels() * nf;
  auto at = [nf](Index k, Index n) { return k * nf + n; };
  MatrixXc h = MatrixXc::Zero(dim, dim);
  for (Index k = 0; k < p.levels(); ++k)
    for (Index n = 0; n < nf; ++n) h(at(k, n), at(k, n)) = p.omega_levels[k] + p.omega * static_cast<double>(n);
  // (i q/2) b_2^+ b_1 a : |1, n> -> sqrt(n) |2, n-1>, and its adjoint.
  for (Index n = 1; n < nf; ++n) {
    const std::complex<double> c = I * p.q / 2.0 * std::sqrt(static_cast<double>(n));
    h(at(1, n - 1), at(0, n)) = c;
    h(at(0, n), at(1, n - 1)) = std::conj(c);
  }
  return h;
}

AtomFieldModel build_atom_field(AtomDescription desc, const AtomFieldParams& p) {
  p.validate();
  const MatrixXc lin = jaynes_cummings_matrix(p);
  const Dims dims = p.dims();
  MatrixXc e = MatrixXc::Zero(p.levels(), p.levels());
  for (Index k = 0; k < p.levels(); ++k) e(k, k) = p.eps_levels[k];

  const HomogeneousObservable nonlinear = [&] {
    if (desc == AtomDescription::polchinski)
      return catalog::density_functional(dims, 0, 0.0, e, 1.0, catalog::DensityVariant::plain);
    const HomogeneousObservable slice =
        catalog::power_family(MatrixXc::Zero(p.levels(), p.levels()), e, 1.0, 2, "eps-square");
    return catalog::weinberg_lift(slice, p.levels(), dims[1], MatrixXc::Identity(dims[1], dims[1]),
                                  catalog::SubsystemSlot::first);
  }();
  auto g_nl = *nonlinear.analytic_gradient();
  auto eval = [lin, nonlinear](const VectorXc& psi) { return psi.dot(lin * psi).real() + nonlinear(psi); };
  auto grad = [lin, g_nl](const VectorXc& psi) -> VectorXc { return lin * psi + g_nl(psi); };
  const std::string name = desc == AtomDescription::polchinski ? "atom+field(polchinski)" : "atom+field(weinberg-fock)";
  HomogeneousObservable h(name, eval, grad);
  return {h, flow_generator(h), lin, p, desc};
}

StateVector fock_state(const AtomFieldParams& p, Index level, Index photons) {
  p.validate();
  if (level < 0 || level >= p.levels() || photons < 0 || photons > p.n_max)
    throw DimensionError("fock_state: level or photon number out of range");
  VectorXc v = VectorXc::Zero(p.levels() * (p.n_max + 1));
  v(level * (p.n_max + 1) + photons) = 1.0;
  return StateVector(v, p.dims());
}

std::string inversion_regime(double omega, double varsigma) {
  if (varsigma == 0.0) return "linear";
  if (std::abs(omega - varsigma) <= 1e-12 * std::max(omega, varsigma)) return "Omega=sigma";
  return omega > varsigma ? "Omega>sigma" : "Omega<sigma";
}

double elliptic_inversion(double omega, double varsigma, double t) {
  if (!(omega >= 0) || !(varsigma >= 0)) throw Error("elliptic_inversion: Omega and varsigma must be non-negative");
  const std::string regime = inversion_regime(omega, varsigma);
  if (regime == "linear") return -std::cos(omega * t);
  if (regime == "Omega=sigma") return -1.0 / std::cosh(omega * t);
  if (regime == "Omega>sigma") return -jacobi_elliptic(omega * t, varsigma / omega).cn;
  return -jacobi_elliptic(varsigma * t, omega / varsigma).dn;
}

InversionSeries inversion_trajectory(const AtomFieldModel& model, const StateVector& psi0, double t_end, double dt) {
  const AtomFieldParams& p = model.params;
  if (psi0.dims() != p.dims()) throw DimensionError("inversion_trajectory: state does not match the atom+field space");
  const Index nf = p.n_max + 1;
  const Index levels = p.levels();

  auto populations = [levels, nf](const VectorXc& v, Index k) {
    return v.segment(k * nf, nf).squaredNorm();
  };
  NlsOptions opt;
  opt.hamiltonian_function = model.hamiltonian;
  opt.h_drift_bound = 1e-7;
  opt.observers["w"] = [populations](const VectorXc& v) {
    return (populations(v, 1) - populations(v, 0)) / v.squaredNorm();
  };
  opt.observers["N"] = [levels, nf](const VectorXc& v) {
    double acc = 0;
    for (Index k = 0; k < levels; ++k)
      for (Index n = 0; n < nf; ++n) {
        const double r3 = k == 0 ? -0.5 : (k == 1 ? 0.5 : 0.0);
        acc += (r3 + static_cast<double>(n)) * std::norm(v(k * nf + n));
      }
    return acc / v.squaredNorm();
  };
  const int n_max = p.n_max;
  opt.observers["top_fock"] = [levels, nf, n_max](const VectorXc& v) {
    double top = 0;
    for (Index k = 0; k < levels; ++k) top += std::norm(v(k * nf + nf - 1));
    top /= v.squaredNorm();
    if (top > kTruncationLeak) {
      std::ostringstream os;
      os << "truncation leak: population " << top << " of the top Fock level exceeds " << kTruncationLeak
         << "; increase n_max (currently " << n_max << ")";
      throw IntegrationError(os.str());
    }
    return top;
  };
  // Third and higher levels: track initially populated components.
  std::vector<Index> tracked;
  for (Index k = 2; k < levels; ++k)
    for (Index n = 0; n < nf; ++n)
      if (std::abs(psi0[k * nf + n]) > 1e-12) tracked.push_back(k * nf + n);
  for (Index idx : tracked) {
    const std::string key = "k" + std::to_string(idx / nf) + "_n" + std::to_string(idx % nf);
    opt.observers["arg_" + key] = [idx](const VectorXc& v) { return std::arg(v(idx)); };
    opt.observers["mod_" + key] = [idx](const VectorXc& v) { return std::abs(v(idx)); };
  }

  const Trajectory traj = integrate_nls(model.builder, psi0, t_end, dt, opt);

  InversionSeries s;
  s.times = traj.times;
  s.w = traj.recorded.at("w");
  s.n_mean = traj.recorded.at("N").front();
  s.n_drift = drift(traj.recorded.at("N"));
  s.norm_drift = drift(traj.recorded.at("norm"));
  s.h_drift = drift(traj.recorded.at("H"));
  for (double v : traj.recorded.at("top_fock")) s.max_top_fock = std::max(s.max_top_fock, v);
  for (Index idx : tracked) {
    const std::string key = "k" + std::to_string(idx / nf) + "_n" + std::to_string(idx % nf);
    const auto& raw = traj.recorded.at("arg_" + key);
    std::vector<double> unwrapped(raw.size());
    unwrapped[0] = raw[0];
    for (std::size_t i = 1; i < raw.size(); ++i)
      unwrapped[i] = unwrapped[i - 1] + std::remainder(raw[i] - raw[i - 1], 2 * M_PI);
    s.level_phases["phase_" + key] = std::move(unwrapped);
    s.level_moduli["modulus_" + key] = traj.recorded.at("mod_" + key);
  }
  const double n_plus_half = s.n_mean + 0.5;
  const bool linear = std::all_of(p.eps_levels.begin(), p.eps_levels.end(), [](double x) { return x == 0.0; });
  s.regime = linear ? "linear" : inversion_regime(p.rabi(n_plus_half), p.varsigma());
  return s;
}

OdeResidual inversion_ode_check(const InversionSeries& series, const AtomFieldParams& p, double n_prime, double n) {
  const std::size_t m = series.times.size();
  if (m < 5 || series.w.size() != m) throw ResolutionError("inversion_ode_check: need at least five samples");
  const double h = series.times[1] - series.times[0];
  for (std::size_t i = 1; i < m; ++i)
    if (std::abs(series.times[i] - series.times[i - 1] - h) > 1e-9 * h)
      throw ResolutionError("inversion_ode_check: sampling is not uniform");

  const double dp = p.detuning_prime();
  const double e = p.epsilon();
  const double q2 = std::norm(p.q);
  const double shift = dp * n_prime + e / 8;
  const double c0 = 2 * dp * shift;
  const double c1 = e * shift - dp * dp - q2 * (n + 0.5);
  const double c2 = -0.75 * e * dp;
  const double c3 = -e * e / 8;
  // Fastest local rate of the right-hand side; second differences need h well below 1/rate.
  const double rate = std::sqrt(std::abs(c1) + 2 * std::abs(c2) + 3 * std::abs(c3) + std::abs(c0));
  if (h * rate > 0.2) {
    std::ostringstream os;
    os << "inversion_ode_check: sample spacing " << h << " is too coarse for second differences; need at most "
       << 0.2 / rate;
    throw ResolutionError(os.str());
  }
  OdeResidual r;
  r.step = h;
  r.samples = m;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double w = series.w[i];
    const double lhs = (series.w[i + 1] - 2 * w + series.w[i - 1]) / (h * h);
    const double rhs = c0 + c1 * w + c2 * w * w + c3 * w * w * w;
    r.linf = std::max(r.linf, std::abs(lhs - rhs));
  }
  return r;
}

}  // namespace nlqm
