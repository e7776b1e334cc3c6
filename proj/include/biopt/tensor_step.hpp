#pragma once

#include <utility>

#include "biopt/acceptance.hpp"

namespace biopt {

// Omega_{x,p}(y) = f(x) + sum_{k=1}^p D^k f(x)[y-x]^k / k!, augmented by M/(p+1)! ||y-x||^{p+1}
struct TaylorModel {
  const CompositeProblem* prob = nullptr;
  Vec x;
  int p = 3;
  double M = 0.0;
  double fx = 0.0;
};

TaylorModel make_taylor_model(const CompositeProblem& prob, const Vec& x, int p, double M);

std::pair<double, Vec> taylor_value_grad(const TaylorModel& tm, const Vec& y);
std::pair<double, Vec> augmented_value_grad(const TaylorModel& tm, const Vec& y);

struct TensorStep {
  double T = 0.0;
  double g = 0.0;
  bool criterion_ok = false;
  double lhs = 0.0;  // ||grad Omega_hat(T) + g||_*
  double rhs = 0.0;  // gamma/(1+gamma) ||grad Omega(T) + g||_*
};

// ||grad Omega_hat(y) + g||_* <= gamma/(1+gamma) ||grad Omega(y) + g||_*
TensorStep tensor_criterion(const TaylorModel& tm, const Vec& y, const Vec& g, double gamma);

TensorStep tensor_step_1d(const TaylorModel& tm, const SimpleTerm& psi, double gamma);

// (M, H) with H = M/p! under which the tensor criterion implies acceptance at beta.
std::pair<double, double> tensor_acceptance_map(int p, double beta, double gamma, double mp1);

// (M_{p+1} + gamma M) / ((1 - gamma) M - M_{p+1})
double tensor_residual_factor(double mp1, double M, double gamma);

bool tensor_residual_bound_check(const CompositeProblem& prob, int p, const Vec& x, const Vec& T, const Vec& g,
                        double M, double gamma, double mp1);

}  // namespace biopt
