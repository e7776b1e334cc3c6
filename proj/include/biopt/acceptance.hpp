#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "biopt/problems.hpp"

namespace biopt {

struct ProxConfig {
  int p = 3;
  double H = 1.0;
  double beta = 0.0;

  bool beta_within_inverse_p() const { return beta <= 1.0 / p + 1e-15; }
  void validate() const;
};

ProxConfig make_prox_config(int p, double H, double beta);

struct AcceptanceCertificate {
  Vec T;
  Vec g;
  Vec anchor;
  Vec composite_gradient;  // grad f(T) + g
  double lhs = 0.0;  // ||grad f^p_{anchor,H}(T) + g||_*
  double rhs = 0.0;  // ||grad f(T) + g||_*
  double beta = 0.0;
  bool accepted = false;
};

struct CertificateChecks {
  bool first = false;   // (1-beta) rhs <= H r^p <= (1+beta) rhs
  bool second = false;  // <grad f + g, anchor - T> >= H/(1+beta) r^{p+1}
  bool third = false;   // <...> >= ((1-beta)/H)^{1/p} rhs^{(p+1)/p}
  bool third_applies = false;
  double worst = 0.0;  // most negative slack over the applicable checks
  bool all() const { return first && second && (third || !third_applies); }
};

// f^p_{xbar,H}(x) = f(x) + H d_{p+1}(x - xbar)
double regularized_value(const CompositeProblem& prob, const ProxConfig& cfg, const Vec& xbar, const Vec& x);
Vec regularized_gradient(const CompositeProblem& prob, const ProxConfig& cfg, const Vec& xbar, const Vec& x);

double subgradient_tolerance(const Vec& g, const Vec& grad);

// Throws CertificateError when g is not a subgradient of psi at T.
AcceptanceCertificate check_acceptable(const CompositeProblem& prob, const ProxConfig& cfg, const Vec& xbar,
                                       const Vec& T, const Vec& g);

CertificateChecks certificate_inequalities(const AcceptanceCertificate& cert, const ProxConfig& cfg,
                                           const MetricSpace& metric);

// Global minimizer of f + psi + H d_{p+1}(. - xbar) in one dimension, with its constructive subgradient.
std::pair<double, double> exact_prox_1d(const CompositeProblem& prob, const ProxConfig& cfg, double xbar);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = true;
};

// Acceptable T for f(x) = x, psi = indicator(x >= 0) at anchor xbar and a fixed subgradient value g.
Interval acceptable_interval_1d(const ProxConfig& cfg, double xbar, double g);

struct ScanPoint {
  double T;
  double g;
  double lhs;
  double rhs;
  bool accepted;
};

// Acceptance test on a uniform grid, g chosen in dpsi(T) closest to -grad f^p(T).
std::vector<ScanPoint> scan_acceptance_1d(const CompositeProblem& prob, const ProxConfig& cfg, double xbar,
                                          double lo, double hi, int points);

}  // namespace biopt
