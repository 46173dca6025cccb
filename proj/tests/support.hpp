#pragma once

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "nlqm/core.hpp"

namespace nlqm::testing {

/// Fixed-seed source of random states and operators.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  VectorXc state(Index dim) {
    VectorXc v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = {normal_(rng_), normal_(rng_)};
    return v;
  }
  VectorXc unit_state(Index dim) { return state(dim).normalized(); }
  MatrixXc hermitian(Index dim) {
    MatrixXc m(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j) m(i, j) = {normal_(rng_), normal_(rng_)};
    return (m + m.adjoint()) / 2.0;
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double max_abs(const MatrixXc& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace nlqm::testing
