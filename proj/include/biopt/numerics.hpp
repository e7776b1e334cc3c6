#pragma once

#include <functional>

#include "biopt/oracles.hpp"

namespace biopt {

// Solves 0 in G(t) + dpsi(t) for continuous nondecreasing G. Kinks and domain
// ends are returned exactly when they solve the inclusion.
double solve_inclusion_1d(const std::function<double(double)>& G, const ScalarPsi& psi, double start);

struct SmoothModel {
  std::function<double(const Vec&)> value;  // may throw DomainError
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
};

struct ProxNewtonOptions {
  double tol = 1e-12;
  int max_iter = 200;
};

struct ProxNewtonResult {
  Vec z;
  double residual = 0.0;
  int iterations = 0;
};

// ||z - prox_psi(z - grad)||
double prox_residual(const SimpleTerm& psi, const Vec& z, const Vec& grad);

// argmin s(z) + psi(z) for smooth convex s by regularized proximal Newton with Armijo backtracking.
ProxNewtonResult prox_newton(const SmoothModel& s, const SimpleTerm& psi, const Vec& z0,
                             const ProxNewtonOptions& opt = {});

// argmin 1/2 w'Qw + b'w over ||w|| <= radius, Q symmetric positive semidefinite.
Vec trust_region_solve(const Mat& q, const Vec& b, double radius);

// argmin 1/2 (w-z)'Q(w-z) + g'(w-z) + psi(w) for separable psi, Q positive definite.
Vec separable_quadratic_prox(const Mat& q, const Vec& g, const Vec& z, const SimpleTerm& psi);

}  // namespace biopt
