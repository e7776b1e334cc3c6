#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "biopt/bregman_inner.hpp"

namespace biopt {

enum class Mode { plain, accelerated, bilevel };

std::string mode_name(Mode m);
Mode parse_mode(const std::string& s);

struct Coefficients {
  double A = 0.0;       // A_k
  double a_next = 0.0;  // A_{k+1} - A_k
};

// plain/accelerated: param = H; bilevel: param = M_{p+1}
double coefficient_A(Mode mode, int p, double beta, double param, int k);
Coefficients coefficients(Mode mode, int p, double beta, double param, int k);

// Psi_k(x) = <s, x> + c + weight psi(x) + d_{p+1}(x - x0)
struct EstimatingState {
  int k = 0;
  double A = 0.0;
  Vec s;
  double c = 0.0;
  double weight = 0.0;
  Vec x0;
};

EstimatingState initial_state(const Vec& x0);
EstimatingState estimating_update(const EstimatingState& st, const Vec& T, double fT, const Vec& grad_at_T,
                                  double a_next);
double estimating_value(const EstimatingState& st, const SimpleTerm& psi, const PowerProx& pp, const Vec& x);
Vec psi_argmin(const EstimatingState& st, const SimpleTerm& psi, const PowerProx& pp);

struct AcceptableSolution {
  AcceptanceCertificate cert;
  int inner_iterations = 0;
  std::optional<InnerTrace> trace;
};

using Provider = std::function<AcceptableSolution(const Vec& anchor)>;

Provider exact_1d_provider(const CompositeProblem& prob, const ProxConfig& cfg);
Provider newton_provider(const CompositeProblem& prob, const ProxConfig& cfg);
Provider inner_provider(const CompositeProblem& prob, const ProxConfig& cfg, const RelativeConstants& rc,
                        int max_inner);
// cfg.H must equal M/p!
Provider tensor_provider(const CompositeProblem& prob, const ProxConfig& cfg, double M, double gamma);

struct RunOptions {
  double eps = 1e-8;
  int max_k = 100;
  std::optional<double> F_star;
  double eps_residual = 0.0;  // stop when the last certificate rhs drops below this (0 disables)
  bool keep_inner_traces = false;
};

struct OuterRecord {
  int k = 0;
  Vec x;
  double F = 0.0;
  double gap = 0.0;  // NaN without F*
  double bound_rhs = 0.0;
  double A = 0.0;
  Vec v;  // accelerated modes: upsilon_k
  Vec y;  // anchor of the step taken from x_k (empty on the last record)
  int inner_iters = 0;
  double cert_lhs = 0.0;
  double cert_rhs = 0.0;
  bool stepped = false;
};

struct OuterTrace {
  Mode mode = Mode::plain;
  ProxConfig cfg;
  double param = 0.0;  // coefficient parameter (H or M_{p+1})
  std::vector<OuterRecord> records;
  std::vector<AcceptanceCertificate> certificates;
  std::vector<EstimatingState> states;  // Psi_k for each record
  std::vector<InnerTrace> inner_traces;
  bool converged = false;
  int iterations = 0;
};

OuterTrace ihopp_run(const CompositeProblem& prob, const ProxConfig& cfg, const Provider& provider,
                     const RunOptions& opt);
// mode = accelerated (param = H) or bilevel (param = M_{p+1}); x_{k+1} is the better of T_k and x_k.
OuterTrace aihopp_run(const CompositeProblem& prob, const ProxConfig& cfg, Mode mode, double param,
                      const Provider& provider, const RunOptions& opt);
OuterTrace biopt_run(const CompositeProblem& prob, int p, const RunOptions& opt, int max_inner = 1000);

// plain: dist = D0, accelerated/bilevel: dist = ||x0 - x*||. +inf at k = 0.
double bound_evaluator(Mode mode, int p, double beta, double H, double dist, double gap0, int k);

struct BoundInputs {
  double D0 = 0.0;
  double R0 = 0.0;
  double gap0 = 0.0;
};

// fills gap and bound_rhs; D0 defaults to max_k ||x_k - x*||
BoundInputs attach_bounds(OuterTrace& tr, const CompositeProblem& prob, double F_star, const Vec& x_star,
                          std::optional<double> D0 = std::nullopt);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

// least squares of log(gap) on log(k) over kmin <= k <= kmax with gap > floor
SlopeFit log_log_slope(const OuterTrace& tr, int kmin = 10, int kmax = 100, double floor = 1e-14);

struct SolverSetup {
  Mode mode = Mode::plain;
  int p = 3;
  std::optional<double> beta;
  std::optional<double> H;
  std::string provider = "auto";  // auto, exact, newton, inner
  int max_inner = 1000;
};

ProxConfig resolve_config(const CompositeProblem& prob, const SolverSetup& s);
OuterTrace run_solver(const CompositeProblem& prob, const SolverSetup& s, const RunOptions& opt);

}  // namespace biopt
