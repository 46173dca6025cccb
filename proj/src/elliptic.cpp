#include <cmath>

#include "nlqm/dynamics.hpp"

namespace nlqm {

namespace {

// Arithmetic-geometric mean sequence for modulus k: a_n, c_n until c_N is negligible.
struct Agm {
  std::vector<double> a, c;
};

Agm agm(double k) {
  Agm s;
  double a = 1.0, b = std::sqrt((1.0 - k) * (1.0 + k)), c = k;
  s.a.push_back(a);
  s.c.push_back(c);
  for (int i = 0; i < 64 && std::abs(c) > 1e-17 * a; ++i) {
    const double an = (a + b) / 2;
    c = (a - b) / 2;
    b = std::sqrt(a * b);
    a = an;
    s.a.push_back(a);
    s.c.push_back(c);
  }
  return s;
}

void check_modulus(double k, const char* where) {
  if (!(k >= 0.0 && k <= 1.0)) throw Error(std::string(where) + ": modulus must lie in [0, 1]");
}

}  // namespace

JacobiValues jacobi_elliptic(double u, double k) {
  check_modulus(k, "jacobi_elliptic");
  if (k == 0.0) return {std::sin(u), std::cos(u), 1.0};
  if (k == 1.0) {
    const double s = 1.0 / std::cosh(u);
    return {std::tanh(u), s, s};
  }
  const Agm s = agm(k);
  const std::size_t n = s.a.size() - 1;
  double phi = std::ldexp(s.a[n] * u, static_cast<int>(n));
  double phi_prev = phi;
  for (std::size_t j = n; j >= 1; --j) {
    phi_prev = phi;
    phi = (phi + std::asin(s.c[j] / s.a[j] * std::sin(phi))) / 2;
  }
  const double sn = std::sin(phi), cn = std::cos(phi);
  const double dn = n >= 1 ? cn / std::cos(phi_prev - phi) : 1.0;
  return {sn, cn, dn};
}

double elliptic_k(double k) {
  check_modulus(k, "elliptic_k");
  if (k == 1.0) throw Error("elliptic_k: K diverges at k = 1");
  const Agm s = agm(k);
  return M_PI / (2 * s.a.back());
}

}  // namespace nlqm
