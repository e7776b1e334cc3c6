#include "biopt/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "biopt/errors.hpp"
#include "biopt/numerics.hpp"

namespace biopt {

void ProxConfig::validate() const {
  if (p < 1) throw ArgumentError("prox order p must be >= 1");
  if (!(H > 0)) throw ArgumentError("regularization H must be positive");
  if (!(beta >= 0 && beta < 1)) throw ArgumentError("beta must lie in [0, 1)");
}

ProxConfig make_prox_config(int p, double H, double beta) {
  ProxConfig c{p, H, beta};
  c.validate();
  return c;
}

double regularized_value(const CompositeProblem& prob, const ProxConfig& cfg, const Vec& xbar, const Vec& x) {
  return prob.f->value(x) + cfg.H * dp1_value(PowerProx(cfg.p, prob.metric), x - xbar);
}

Vec regularized_gradient(const CompositeProblem& prob, const ProxConfig& cfg, const Vec& xbar, const Vec& x) {
  return prob.f->gradient(x) + cfg.H * dp1_gradient(PowerProx(cfg.p, prob.metric), x - xbar);
}

double subgradient_tolerance(const Vec& g, const Vec& grad) {
  return 1e-9 * (1.0 + g.norm() + grad.norm());
}

AcceptanceCertificate check_acceptable(const CompositeProblem& prob, const ProxConfig& cfg, const Vec& xbar,
                                       const Vec& T, const Vec& g) {
  const Vec grad = prob.f->gradient(T);
  if (!prob.psi.is_subgradient(T, g, subgradient_tolerance(g, grad)))
    throw CertificateError("g is not a subgradient of " + prob.psi.name() + " at T");
  AcceptanceCertificate c;
  c.T = T;
  c.g = g;
  c.anchor = xbar;
  c.beta = cfg.beta;
  c.composite_gradient = grad + g;
  c.lhs = dual_norm(prob.metric, c.composite_gradient + cfg.H * dp1_gradient(PowerProx(cfg.p, prob.metric), T - xbar));
  c.rhs = dual_norm(prob.metric, c.composite_gradient);
  c.accepted = c.lhs <= cfg.beta * c.rhs + 1e-12;
  return c;
}

CertificateChecks certificate_inequalities(const AcceptanceCertificate& cert, const ProxConfig& cfg,
                                           const MetricSpace& metric) {
  constexpr double slack = 1e-10;
  CertificateChecks out;
  const int p = cfg.p;
  const double H = cfg.H, b = cfg.beta;
  const double r = primal_norm(metric, cert.T - cert.anchor);
  const double hr = H * std::pow(r, p);
  const double inner = cert.composite_gradient.dot(cert.anchor - cert.T);

  const double s1 = std::min(hr - (1 - b) * cert.rhs, (1 + b) * cert.rhs - hr);
  const double s2 = inner - H / (1 + b) * std::pow(r, p + 1);
  out.first = s1 >= -slack;
  out.second = s2 >= -slack;
  out.worst = std::min(s1, s2);
  out.third_applies = cfg.beta_within_inverse_p();
  if (out.third_applies) {
    const double s3 = inner - std::pow((1 - b) / H, 1.0 / p) * std::pow(cert.rhs, (p + 1.0) / p);
    out.third = s3 >= -slack;
    out.worst = std::min(out.worst, s3);
  }
  return out;
}

std::pair<double, double> exact_prox_1d(const CompositeProblem& prob, const ProxConfig& cfg, double xbar) {
  if (prob.dim() != 1) throw ArgumentError("exact_prox_1d needs a one-dimensional problem");
  const ScalarPsi s = prob.psi.coordinate(0, 1);
  const PowerProx pp(cfg.p, prob.metric);
  const auto G = [&](double t) {
    const Vec x = Vec::Constant(1, t);
    return (prob.f->gradient(x) + cfg.H * dp1_gradient(pp, x - Vec::Constant(1, xbar)))(0);
  };
  const double T = solve_inclusion_1d(G, s, xbar);
  const auto [gl, gu] = s.subdifferential(T);
  const double g = std::clamp(-G(T), gl, gu);
  return {T, g};
}

Interval acceptable_interval_1d(const ProxConfig& cfg, double xbar, double g) {
  // f(x) = x: lhs = |1 + g + H |T - xbar|^{p-1}(T - xbar)|, rhs = |1 + g|
  const double a = 1.0 + g;
  const double lo_v = (-a - cfg.beta * std::abs(a)) / cfg.H;
  const double hi_v = (-a + cfg.beta * std::abs(a)) / cfg.H;
  const auto root = [&](double v) { return std::copysign(std::pow(std::abs(v), 1.0 / cfg.p), v); };
  Interval out;
  double lo = xbar + root(lo_v), hi = xbar + root(hi_v);
  if (g == 0.0) {
    lo = std::max(lo, 0.0);
    out.empty = lo > hi;
  } else if (g < 0.0) {
    // only T = 0 carries a negative subgradient of the indicator
    out.empty = !(lo <= 0.0 && 0.0 <= hi);
    lo = hi = 0.0;
  } else {
    out.empty = true;
  }
  out.lo = lo;
  out.hi = hi;
  return out;
}

std::vector<ScanPoint> scan_acceptance_1d(const CompositeProblem& prob, const ProxConfig& cfg, double xbar,
                                          double lo, double hi, int points) {
  std::vector<ScanPoint> out;
  out.reserve(points);
  const Vec xb = Vec::Constant(1, xbar);
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? lo : lo + (hi - lo) * i / (points - 1.0);
    const Vec T = Vec::Constant(1, t);
    if (!std::isfinite(prob.psi.value(T)) || !prob.f->in_domain(T)) continue;
    const Vec target = -regularized_gradient(prob, cfg, xb, T);
    const Vec g = prob.psi.select_subgradient(T, target);
    const auto c = check_acceptable(prob, cfg, xb, T, g);
    out.push_back({t, g(0), c.lhs, c.rhs, c.accepted});
  }
  return out;
}

}  // namespace biopt
