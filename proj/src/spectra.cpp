#include "nlqm/spectra.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace nlqm {

namespace {

const std::complex<double> I(0.0, 1.0);

struct Refined {
  VectorXc psi;
  double lambda;
  double residual;
};

// Real residual vector of the eigenvalue system at x = (Re psi, Im psi, lambda).
Eigen::VectorXd eigen_system(const HomogeneousObservable& obs, const Eigen::VectorXd& x, Index d, Index gauge) {
  VectorXc psi(d);
  for (Index k = 0; k < d; ++k) psi(k) = {x(k), x(d + k)};
  const VectorXc r = wirtinger_gradient(obs, psi) - x(2 * d) * psi;
  Eigen::VectorXd f(2 * d + 2);
  f.head(d) = r.real();
  f.segment(d, d) = r.imag();
  f(2 * d) = psi.squaredNorm() - 1.0;
  f(2 * d + 1) = psi(gauge).imag();
  return f;
}

std::optional<Refined> refine(const HomogeneousObservable& obs, VectorXc seed, const EigenSearchOptions& opt) {
  const Index d = seed.size();
  seed = gauge_fixed(VectorXc(seed / seed.norm()));
  Index gauge = 0;
  seed.cwiseAbs().maxCoeff(&gauge);
  Eigen::VectorXd x(2 * d + 1);
  x.head(d) = seed.real();
  x.segment(d, d) = seed.imag();
  x(2 * d) = obs(seed);

  Eigen::VectorXd f = eigen_system(obs, x, d, gauge);
  double fn = f.norm();
  const double h = 1e-7;
  for (int it = 0; it < opt.max_iterations && fn > 1e-15; ++it) {
    Eigen::MatrixXd jac(f.size(), x.size());
    for (Index j = 0; j < x.size(); ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      jac.col(j) = (eigen_system(obs, xp, d, gauge) - eigen_system(obs, xm, d, gauge)) / (2 * h);
    }
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-f);
    if (!step.allFinite()) return std::nullopt;
    double scale = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 20; ++ls, scale /= 2) {
      const Eigen::VectorXd xn = x + scale * step;
      const Eigen::VectorXd fnew = eigen_system(obs, xn, d, gauge);
      if (fnew.allFinite() && fnew.norm() < fn) {
        x = xn;
        f = fnew;
        fn = fnew.norm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  VectorXc psi(d);
  for (Index k = 0; k < d; ++k) psi(k) = {x(k), x(d + k)};
  if (!(psi.norm() > 0.5)) return std::nullopt;
  psi = gauge_fixed(VectorXc(psi / psi.norm()));
  const VectorXc g = wirtinger_gradient(obs, psi);
  const double lambda = psi.dot(g).real();
  const double residual = (g - lambda * psi).norm();
  if (!std::isfinite(residual) || residual >= opt.accept_residual) return std::nullopt;
  return Refined{psi, lambda, residual};
}

double eigen_residual(const HomogeneousObservable& obs, const VectorXc& psi) {
  const VectorXc g = wirtinger_gradient(obs, psi);
  return (g - psi.dot(g).real() * psi).norm();
}

// a and b equal up to relative phases of their components, and states along the
// phase path between them are eigenstates too.
bool same_phase_orbit(const HomogeneousObservable& obs, const Refined& a, const Refined& b) {
  if (std::abs(a.lambda - b.lambda) > 1e-8 * std::max(1.0, std::abs(a.lambda))) return false;
  if ((a.psi.cwiseAbs() - b.psi.cwiseAbs()).cwiseAbs().maxCoeff() > 1e-6) return false;
  for (double frac : {1.0 / 3.0, 2.0 / 3.0}) {
    VectorXc mid(a.psi.size());
    for (Index k = 0; k < mid.size(); ++k) {
      const double pa = std::arg(a.psi(k));
      const double diff = std::remainder(std::arg(b.psi(k)) - pa, 2 * M_PI);
      mid(k) = std::abs(a.psi(k)) * std::exp(I * (pa + frac * diff));
    }
    try {
      if (eigen_residual(obs, mid) > 1e-8) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

std::vector<VectorXc> seeds(Index dim, const EigenSearchOptions& opt) {
  std::vector<VectorXc> out;
  const int na = std::max(1, opt.amplitude_steps), np = std::max(1, opt.phase_steps);
  if (dim == 2) {
    for (int i = 0; i < na; ++i) {
      const double theta = na == 1 ? M_PI / 4 : (M_PI / 2) * i / (na - 1);
      for (int j = 0; j < np; ++j) {
        const double phi = 2 * M_PI * j / np;
        VectorXc v(2);
        v << std::cos(theta), std::exp(I * phi) * std::sin(theta);
        out.push_back(v);
      }
    }
    return out;
  }
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> normal;
  for (int i = 0; i < na * np; ++i) {
    VectorXc v(dim);
    for (Index k = 0; k < dim; ++k) v(k) = {normal(rng), normal(rng)};
    out.push_back(v);
  }
  for (Index k = 0; k < dim; ++k) out.push_back(VectorXc::Unit(dim, k));
  return out;
}

}  // namespace

EigenSearchResult find_eigenstates(const HomogeneousObservable& obs, Index dim, const EigenSearchOptions& options) {
  if (dim < 1) throw DimensionError("find_eigenstates: dimension must be positive");
  EigenSearchResult result;
  struct Cluster {
    Refined rep;
    bool orbit = false;
  };
  std::vector<Cluster> clusters;
  for (const VectorXc& seed : seeds(dim, options)) {
    ++result.seeds;
    std::optional<Refined> sol;
    try {
      sol = refine(obs, seed, options);
    } catch (const Error&) {
      sol.reset();
    }
    if (!sol) {
      ++result.failed_seeds;
      continue;
    }
    bool merged = false;
    for (auto& c : clusters) {
      if (fidelity(c.rep.psi, sol->psi) > options.merge_fidelity) {
        merged = true;
      } else if (same_phase_orbit(obs, c.rep, *sol)) {
        merged = true;
        c.orbit = true;
      }
      if (merged) {
        if (sol->residual < c.rep.residual && !c.orbit) c.rep = *sol;
        break;
      }
    }
    if (!merged) clusters.push_back({*sol});
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& a, const Cluster& b) { return a.rep.lambda < b.rep.lambda; });
  for (const auto& c : clusters)
    result.eigenstates.push_back({c.rep.lambda, StateVector(c.rep.psi), c.rep.residual, c.orbit});
  return result;
}

std::vector<double> diagonal_values(const HomogeneousObservable& obs, const StateVector& psi) {
  psi.require_nonzero("diagonal_values");
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(nonlinear_operator(obs, psi).matrix(), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// |sum_i w_i y_i e^{i omega t_i}| on a uniform grid, with a rotating phasor.
double spectral_power(const std::vector<std::complex<double>>& y, const std::vector<double>& window, double t0,
                      double dt, double omega) {
  std::complex<double> acc(0.0), ph = std::exp(I * (omega * t0));
  const std::complex<double> rot = std::exp(I * (omega * dt));
  for (std::size_t i = 0; i < y.size(); ++i) {
    acc += window[i] * y[i] * ph;
    ph *= rot;
  }
  return std::abs(acc);
}

// Golden-section maximization of f on [a, b].
template <typename F>
double golden_max(const F& f, double a, double b, double tol) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2;
}

// Frequency of the strongest periodogram peak of y on [lo, hi].
double periodogram_peak(const std::vector<std::complex<double>>& y, double t0, double dt, double lo, double hi) {
  const std::size_t n = y.size();
  std::vector<double> window(n);
  for (std::size_t i = 0; i < n; ++i) window[i] = 0.5 - 0.5 * std::cos(2 * M_PI * i / (n - 1));
  const double span = dt * (n - 1);
  const double spacing = 2 * M_PI / span / 8;
  const long count = std::max(2L, static_cast<long>(std::ceil((hi - lo) / spacing)));
  double best = lo, best_p = -1;
  for (long j = 0; j <= count; ++j) {
    const double w = lo + (hi - lo) * j / count;
    const double p = spectral_power(y, window, t0, dt, w);
    if (p > best_p) {
      best_p = p;
      best = w;
    }
  }
  const double step = (hi - lo) / count;
  return golden_max([&](double w) { return spectral_power(y, window, t0, dt, w); }, std::max(lo, best - step),
                    std::min(hi, best + step), 1e-12 * std::max(1.0, std::abs(best)));
}

}  // namespace

std::vector<FrequencyComponent> eigenfrequencies(const Trajectory& traj, double tolerance) {
  const std::size_t n = traj.times.size();
  if (n < 3) throw ResolutionError("eigenfrequencies: need at least three samples");
  if (traj.states.size() != n) throw ResolutionError("eigenfrequencies: every state must be stored (state_stride 1)");
  const double dt = traj.times[1] - traj.times[0];
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(traj.times[i] - traj.times[i - 1] - dt) > 1e-9 * dt)
      throw ResolutionError("eigenfrequencies: sampling is not uniform");
  const double t0 = traj.times.front();
  const double span = traj.times.back() - t0;

  std::vector<FrequencyComponent> out;
  const Index d = traj.states.front().size();
  for (Index k = 0; k < d; ++k) {
    std::vector<std::complex<double>> a(n);
    double weight = 0, mod_lo = INFINITY, mod_hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = traj.states[i](k);
      weight += std::norm(a[i]);
      mod_lo = std::min(mod_lo, std::abs(a[i]));
      mod_hi = std::max(mod_hi, std::abs(a[i]));
    }
    weight /= n;
    if (weight < 1e-14) continue;

    if (mod_hi - mod_lo <= 1e-6 * mod_hi) {
      std::vector<double> phase(n);
      phase[0] = std::arg(a[0]);
      for (std::size_t i = 1; i < n; ++i) {
        const double jump = std::remainder(std::arg(a[i]) - std::arg(a[i - 1]), 2 * M_PI);
        if (std::abs(jump) > M_PI / 2) {
          std::ostringstream os;
          os << "eigenfrequencies: component " << k << " advances " << std::abs(jump)
             << " rad per sample; sample at least twice as finely";
          throw ResolutionError(os.str());
        }
        phase[i] = phase[i - 1] + jump;
      }
      // Least-squares slope.
      double st = 0, sp = 0;
      for (std::size_t i = 0; i < n; ++i) {
        st += traj.times[i];
        sp += phase[i];
      }
      st /= n;
      sp /= n;
      double num = 0, den = 0;
      for (std::size_t i = 0; i < n; ++i) {
        num += (traj.times[i] - st) * (phase[i] - sp);
        den += (traj.times[i] - st) * (traj.times[i] - st);
      }
      const double slope = num / den;
      double worst = 0;
      for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(phase[i] - sp - slope * (traj.times[i] - st)));
      if (worst < 1e-6) {
        out.push_back({k, -slope, weight, "phase"});
        continue;
      }
    }
    if (2 * M_PI / span > tolerance) {
      std::ostringstream os;
      os.precision(6);
      os << "eigenfrequencies: component " << k << " is not single-frequency and a Fourier resolution of "
         << tolerance << " needs a duration of at least " << 2 * M_PI / tolerance << " (have " << span << ")";
      throw ResolutionError(os.str());
    }
    // psi_k ~ exp(-i omega t) peaks at +omega in sum y e^{+i omega t}.
    const double nyquist = M_PI / dt;
    out.push_back({k, periodogram_peak(a, t0, dt, -nyquist, nyquist), weight, "fourier"});
  }
  return out;
}

// ---------------------------------------------------------------------------

double first_moment_probability(double s) { return s * s; }

double star_square_probability(double e, double eps, double s) {
  const double den = 2 * e * eps + eps * eps;
  if (den == 0.0) throw SingularityError("star-square method is singular when 2 E eps + eps^2 = 0");
  return ((4 * eps * eps + 2 * e * eps) * s * s - 3 * eps * eps * std::pow(s, 4)) / den;
}

MomentProbabilities moment_probabilities(const HomogeneousObservable& obs, const StateVector& psi,
                                         MomentMethod method) {
  if (psi.size() != 2) throw DimensionError("moment_probabilities: two-level observables only");
  psi.require_nonzero("moment_probabilities");
  const double e = obs.param("E"), eps = obs.param("eps");
  if (eps == 0.0) throw SingularityError("moment_probabilities: eps = 0 leaves a single eigenvalue");
  const double n = psi.squared_norm();
  const VectorXc& v = psi.amplitudes();

  // Fit p to m1 = (E+eps) p + E (1-p) and to m2 = (E+eps)^2 p + E^2 (1-p).
  ProbabilitySet first{"first-moment", {e + eps, e}, {}};
  const double p1 = (obs(v) / n - e) / eps;
  first.probabilities = {p1, 1 - p1};

  ProbabilitySet star{"star-square", {e + eps, e}, {}};
  const double den = 2 * e * eps + eps * eps;
  if (den == 0.0) throw SingularityError("star-square method is singular when 2 E eps + eps^2 = 0");
  const double m2 = star_product(obs, obs, v).real() / n;
  const double p2 = (m2 - e * e) / den;
  star.probabilities = {p2, 1 - p2};

  if (method == MomentMethod::first_moment) return {first, star, p1 - p2};
  return {star, first, p2 - p1};
}

// ---------------------------------------------------------------------------

SinusoidFit fit_sinusoid(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  if (n < 8 || y.size() != n) throw ResolutionError("fit_sinusoid: need at least eight paired samples");
  const double dt = t[1] - t[0];
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(t[i] - t[i - 1] - dt) > 1e-9 * dt) throw ResolutionError("fit_sinusoid: sampling is not uniform");

  double mean = 0;
  for (double v : y) mean += v;
  mean /= n;
  std::vector<std::complex<double>> centered(n);
  double spread = 0;
  for (std::size_t i = 0; i < n; ++i) {
    centered[i] = y[i] - mean;
    spread = std::max(spread, std::abs(y[i] - mean));
  }
  if (spread < 1e-14) return {0.0, 0.0, 0.0, mean, spread};

  double omega = periodogram_peak(centered, t[0], dt, 0.0, M_PI / dt);
  Eigen::Vector4d p;  // a sin + b cos + c, omega
  auto linear = [&](double w) {
    Eigen::MatrixXd m(n, 3);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      m(i, 0) = std::sin(w * t[i]);
      m(i, 1) = std::cos(w * t[i]);
      m(i, 2) = 1.0;
      rhs(i) = y[i];
    }
    return Eigen::Vector3d(m.colPivHouseholderQr().solve(rhs));
  };
  p << linear(omega), omega;
  auto residuals = [&](const Eigen::Vector4d& q) {
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i)
      r(i) = q(0) * std::sin(q(3) * t[i]) + q(1) * std::cos(q(3) * t[i]) + q(2) - y[i];
    return r;
  };
  Eigen::VectorXd r = residuals(p);
  for (int it = 0; it < 100; ++it) {
    Eigen::MatrixXd jac(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sin(p(3) * t[i]), c = std::cos(p(3) * t[i]);
      jac(i, 0) = s;
      jac(i, 1) = c;
      jac(i, 2) = 1.0;
      jac(i, 3) = t[i] * (p(0) * c - p(1) * s);
    }
    const Eigen::Vector4d step = jac.colPivHouseholderQr().solve(-r);
    const Eigen::Vector4d next = p + step;
    const Eigen::VectorXd rn = residuals(next);
    if (!(rn.norm() <= r.norm())) break;
    const bool done = step.cwiseAbs().maxCoeff() < 1e-15 * std::max(1.0, p.cwiseAbs().maxCoeff());
    p = next;
    r = rn;
    if (done) break;
  }
  SinusoidFit fit;
  fit.amplitude = std::hypot(p(0), p(1));
  fit.phase = std::atan2(p(1), p(0));
  fit.omega = p(3);
  if (fit.omega < 0) {
    fit.omega = -fit.omega;
    fit.phase = M_PI - fit.phase;
  }
  fit.offset = p(2);
  fit.max_residual = r.cwiseAbs().maxCoeff();
  return fit;
}

}  // namespace nlqm
