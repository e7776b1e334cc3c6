#include "biopt/tensor_step.hpp"

#include <algorithm>
#include <cmath>

#include "biopt/errors.hpp"
#include "biopt/numerics.hpp"

namespace biopt {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

TaylorModel make_taylor_model(const CompositeProblem& prob, const Vec& x, int p, double M) {
  if (p < 1) throw ArgumentError("Taylor order must be >= 1");
  if (p > prob.f->max_order()) throw CapabilityError("oracle lacks derivatives of order " + std::to_string(p));
  if (M < 0) throw ArgumentError("augmentation constant must be nonnegative");
  return {&prob, x, p, M, prob.f->value(x)};
}

std::pair<double, Vec> taylor_value_grad(const TaylorModel& tm, const Vec& y) {
  const SmoothOracle& f = *tm.prob->f;
  const Vec h = y - tm.x;
  double v = tm.fx;
  Vec g = Vec::Zero(h.size());
  for (int k = 1; k <= tm.p; ++k) {
    v += f.directional(tm.x, h, k) / factorial(k);
    g += f.tensor_vector(tm.x, h, k) / factorial(k - 1);
  }
  return {v, g};
}

std::pair<double, Vec> augmented_value_grad(const TaylorModel& tm, const Vec& y) {
  auto [v, g] = taylor_value_grad(tm, y);
  const PowerProx pp(tm.p, tm.prob->metric);
  const Vec h = y - tm.x;
  v += tm.M / factorial(tm.p + 1) * std::pow(primal_norm(pp.metric, h), tm.p + 1);
  g += tm.M / factorial(tm.p) * dp1_gradient(pp, h);
  return {v, g};
}

TensorStep tensor_criterion(const TaylorModel& tm, const Vec& y, const Vec& g, double gamma) {
  const MetricSpace& m = tm.prob->metric;
  TensorStep s;
  s.T = y(0);
  s.g = g(0);
  s.lhs = dual_norm(m, augmented_value_grad(tm, y).second + g);
  s.rhs = gamma / (1 + gamma) * dual_norm(m, taylor_value_grad(tm, y).second + g);
  s.criterion_ok = s.lhs <= s.rhs + 1e-12;
  return s;
}

TensorStep tensor_step_1d(const TaylorModel& tm, const SimpleTerm& psi, double gamma) {
  if (tm.x.size() != 1) throw ArgumentError("tensor_step_1d needs a one-dimensional model");
  if (!(gamma >= 0 && gamma < 1)) throw ArgumentError("gamma must lie in [0, 1)");
  const ScalarPsi s = psi.coordinate(0, 1);
  const auto G = [&](double t) { return augmented_value_grad(tm, Vec::Constant(1, t)).second(0); };
  const double T = solve_inclusion_1d(G, s, tm.x(0));
  const auto [gl, gu] = s.subdifferential(T);
  const double g = std::clamp(-G(T), gl, gu);
  return tensor_criterion(tm, Vec::Constant(1, T), Vec::Constant(1, g), gamma);
}

std::pair<double, double> tensor_acceptance_map(int p, double beta, double gamma, double mp1) {
  if (!(beta >= 0 && beta < 1)) throw ArgumentError("beta must lie in [0, 1)");
  if (!(gamma >= 0 && gamma < beta / (1 + beta))) throw ArgumentError("gamma must lie in [0, beta/(1+beta))");
  const double den = beta * (1 - gamma) - gamma;
  if (!(den > 0)) throw ArgumentError("beta(1-gamma) - gamma must be positive");
  const double M = (1 + beta) / den * mp1;
  if (!((1 - gamma) * M > mp1)) throw ArgumentError("map violates (1-gamma) M > M_{p+1}");
  return {M, M / factorial(p)};
}

double tensor_residual_factor(double mp1, double M, double gamma) {
  const double den = (1 - gamma) * M - mp1;
  if (!(den > 0)) throw ArgumentError("residual factor needs (1-gamma) M > M_{p+1}");
  return (mp1 + gamma * M) / den;
}

bool tensor_residual_bound_check(const CompositeProblem& prob, int p, const Vec& x, const Vec& T, const Vec& g,
                        double M, double gamma, double mp1) {
  const PowerProx pp(p, prob.metric);
  const Vec grad = prob.f->gradient(T);
  const double lhs = dual_norm(prob.metric, grad + M / factorial(p) * dp1_gradient(pp, T - x) + g);
  const double rhs = tensor_residual_factor(mp1, M, gamma) * dual_norm(prob.metric, grad + g);
  return lhs <= rhs * (1 + 1e-12) + 1e-12;
}

}  // namespace biopt
