#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "biopt/outer_solvers.hpp"
#include "biopt/verify.hpp"

using namespace biopt;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

struct SuiteSummary {
  int checks = 0;
  int failed = 0;
  double worst = -1e300;
  std::string first_failure;
};

SuiteSummary summarize(const std::vector<CheckResult>& rows, const std::function<bool(const CheckResult&)>& keep) {
  SuiteSummary s;
  for (const auto& r : rows) {
    if (!keep(r)) continue;
    ++s.checks;
    s.worst = std::max(s.worst, r.value - r.threshold);
    if (!r.pass) {
      ++s.failed;
      if (s.first_failure.empty()) s.first_failure = r.name + " = " + fmt(r.value);
    }
  }
  return s;
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

void report_suite(int id, const std::string& what, const SuiteSummary& s) {
  std::string d = std::to_string(s.checks) + " checks, " + std::to_string(s.failed) + " failed";
  if (!s.first_failure.empty()) d += ", first: " + s.first_failure;
  report(id, s.checks > 0 && s.failed == 0, what, d);
}

// criteria 1 and 2
void rate_bounds(int id, Mode mode, double limit_s) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = -1e300, worst_upsilon = -1e300;
  int points = 0;
  std::string runs;
  for (const char* pid : {"quartic-abs-1d", "quartic-sep-10d"}) {
    const CompositeProblem prob = make_problem(pid);
    const ReferenceSolution ref = reference_solution(prob);
    SolverSetup s;
    s.mode = mode;
    s.p = 3;
    s.beta = 1.0 / 3;
    RunOptions opt;
    opt.eps = 1e-10;
    opt.max_k = 100;
    opt.F_star = ref.F;
    OuterTrace tr = run_solver(prob, s, opt);
    attach_bounds(tr, prob, ref.F, ref.x);
    const PowerProx pp(3, prob.metric);
    const double d0 = dp1_value(pp, prob.x0 - ref.x);
    if (mode == Mode::plain && prob.dim() == 1) {
      const double F0 = prob.F(prob.x0);
      double level = 0.0;
      for (int i = 0; i <= 200000; ++i) {
        const Vec x = Vec::Constant(1, -10.0 + 20.0 * i / 200000);
        if (prob.F(x) <= F0) level = std::max(level, std::abs(x(0) - ref.x(0)));
      }
      OuterTrace lt = tr;
      attach_bounds(lt, prob, ref.F, ref.x, level);
      for (const auto& r : lt.records)
        if (r.k >= 1) worst = std::max(worst, r.gap - r.bound_rhs - 1e-8);
      runs += std::string(runs.empty() ? "" : ", ") + pid + " level-set D0=" + fmt(level);
    }
    for (const auto& r : tr.records) {
      if (mode != Mode::plain) worst_upsilon = std::max(worst_upsilon, dp1_value(pp, r.v - ref.x) - 4 * d0);
      if (r.k < 1) continue;
      worst = std::max(worst, r.gap - r.bound_rhs - 1e-8);
      ++points;
    }
    runs += std::string(runs.empty() ? "" : ", ") + pid + " k=" + std::to_string(tr.iterations) +
            " gap=" + fmt(tr.records.back().gap);
  }
  const double t = seconds_since(t0);
  bool pass = worst <= 0 && t < limit_s && points > 0;
  std::string d = std::to_string(points) + " points, worst gap - bound - 1e-8 = " + fmt(worst) + ", " + runs +
                  ", " + fmt(t) + " s";
  if (mode != Mode::plain) {
    pass = pass && worst_upsilon <= 1e-12;
    d += ", worst d(v_k - x*) - 2^{p-1} d(x0 - x*) = " + fmt(worst_upsilon);
  }
  report(id, pass, mode == Mode::plain ? "plain rate bound" : "accelerated rate bound", d);
}

void empirical_rates() {
  const CompositeProblem prob = make_problem("power8-1d");
  const ReferenceSolution ref = reference_solution(prob);
  bool pass = true;
  std::string d;
  for (int p : {2, 3}) {
    for (Mode mode : {Mode::plain, Mode::accelerated}) {
      SolverSetup s;
      s.mode = mode;
      s.p = p;
      s.H = 1.0;
      RunOptions opt;
      opt.eps = 0.0;
      opt.max_k = 100;
      opt.F_star = ref.F;
      OuterTrace tr = run_solver(prob, s, opt);
      attach_bounds(tr, prob, ref.F, ref.x);
      const SlopeFit fit = log_log_slope(tr, 10, 100);
      const double target = (mode == Mode::plain ? -p : -(p + 1)) + 0.3;
      const bool ok = fit.points >= 2 && fit.slope <= target;
      pass = pass && ok;
      d += std::string(d.empty() ? "" : ", ") + mode_name(mode) + " p=" + std::to_string(p) + " slope " +
           fmt(fit.slope) + " <= " + fmt(target) + " gap100 " + fmt(tr.records.back().gap);
    }
  }
  report(3, pass, "empirical rates on power8-1d", d);
}

// inner iteration counts from anchors with F(y) - F* = eps
void inner_growth() {
  const CompositeProblem prob = make_problem("quartic-abs-1d");
  const int p = 3;
  const double M = prob.regularity_bound(p + 1);
  const RelativeConstants rc = relative_constants(p, bilevel_H(p, M), M);
  const ProxConfig cfg = make_prox_config(p, rc.H, 1.0 / p);
  std::vector<double> ell, count;
  std::string d = "counts";
  for (int e = 2; e <= 8; ++e) {
    const double eps = std::pow(10.0, -e);
    double lo = 0, hi = 1;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (std::pow(mid, 4) + mid < eps ? lo : hi) = mid;
    }
    const Vec y = Vec::Constant(1, 0.5 * (lo + hi));
    const ScalingFunction sf(prob, y, p, rc.H);
    const auto [cert, trace] = inner_solve(sf, cfg, rc, y, 1000);
    ell.push_back(std::log(1 / eps));
    count.push_back(trace.iterations);
    d += " " + std::to_string(trace.iterations);
  }
  const int n = static_cast<int>(ell.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int j = 0; j < n; ++j) {
    sx += ell[j];
    sy += count[j];
    sxx += ell[j] * ell[j];
    sxy += ell[j] * count[j];
  }
  const double bhat = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double ahat = (sy - bhat * sx) / n;
  const double theory = 2 * (p + 1) / rc.kappa;
  const double B = std::max(bhat, theory);
  double A = 1.0;
  for (int j = 0; j < n; ++j) A = std::max(A, count[j] - B * ell[j]);
  bool under = true;
  for (int j = 0; j < n; ++j) under = under && count[j] <= A + B * ell[j];
  d += ", least squares A=" + fmt(ahat) + " B=" + fmt(bhat) + ", envelope A=" + fmt(A) + " B=" + fmt(B);
  report(6, under && A > 0 && B > 0 && bhat <= theory, "inner counts grow at most logarithmically in 1/eps", d);
}

void example1() {
  const CompositeProblem prob = make_problem("linear-nonneg-1d");
  const double xbar = 1.4, beta = 0.85;
  const ProxConfig cfg = make_prox_config(3, 1.0, beta);
  const auto scan = scan_acceptance_1d(prob, cfg, xbar, 0.0, xbar + 1, 100001);
  double lo = 1e300, hi = -1e300;
  for (const auto& s : scan)
    if (s.accepted) {
      lo = std::min(lo, s.T);
      hi = std::max(hi, s.T);
    }
  const double elo = std::max(0.0, xbar - std::cbrt(1 + beta)), ehi = std::max(0.0, xbar - std::cbrt(1 - beta));
  const double err = std::max(std::abs(lo - elo), std::abs(hi - ehi));
  bool prox_ok = true;
  int tested = 0;
  for (double b = 0.0; b < 0.96; b += 0.05) {
    for (double xb : {0.6, 1.4}) {
      const ProxConfig c = make_prox_config(3, 1.0, b);
      const auto [T, g] = exact_prox_1d(prob, c, xb);
      prox_ok = prox_ok && check_acceptable(prob, c, Vec::Constant(1, xb), Vec::Constant(1, T), Vec::Constant(1, g)).accepted;
      ++tested;
    }
  }
  report(7, err <= 1e-4 && prox_ok, "acceptance set of the linear example",
         "scanned [" + fmt(lo) + ", " + fmt(hi) + "] vs [" + fmt(elo) + ", " + fmt(ehi) + "], endpoint error " +
             fmt(err) + ", exact prox accepted " + (prox_ok ? "at all " : "not at all ") + std::to_string(tested) +
             " (beta, anchor) pairs");
}

void oracle_fd() {
  double worst = 0;
  int checks = 0;
  std::mt19937_64 rng(10);
  std::normal_distribution<double> nd;
  for (const auto& id : problem_ids()) {
    const CompositeProblem prob = make_problem(id);
    const int n = prob.dim();
    for (int s = 0; s < 50; ++s) {
      const Vec x = prob.sample(rng);
      Vec h(n);
      for (int i = 0; i < n; ++i) h(i) = nd(rng);
      h *= 0.5 / h.norm();
      const double e = 1e-5;
      const double gfd = (prob.f->value(x + e * h) - prob.f->value(x - e * h)) / (2 * e);
      const double g = prob.f->gradient(x).dot(h);
      const double hfd = (prob.f->gradient(x + e * h) - prob.f->gradient(x - e * h)).dot(h) / (2 * e);
      const double hf = prob.f->hessian_form(x, h);
      worst = std::max({worst, std::abs(gfd - g) / std::max(1.0, std::abs(g)),
                        std::abs(hfd - hf) / std::max(1.0, std::abs(hf)), fd_check(*prob.f, x, h, 1, e),
                        fd_check(*prob.f, x, h, 2, e)});
      checks += 4;
    }
  }
  report(10, worst <= 1e-5, "finite-difference oracle checks",
         std::to_string(checks) + " checks on " + std::to_string(problem_ids().size()) + " problems, worst relative error " +
             fmt(worst));
}

std::atomic<int> max_order_seen{0};

class CountingNegLog : public NegLog {
 public:
  double derivative(double t, int order) const override {
    int cur = max_order_seen.load();
    while (order > cur && !max_order_seen.compare_exchange_weak(cur, order)) {
    }
    return NegLog::derivative(t, order);
  }
};

void bilevel_neglog() {
  const auto t0 = std::chrono::steady_clock::now();
  const CompositeProblem base = make_problem("neglog-sep");
  const ReferenceSolution ref = reference_solution(base);
  const auto* ss = dynamic_cast<const SeparableStructured*>(base.f.get());
  if (!ss) {
    report(11, false, "bi-level neg-log runs", "problem is not separable");
    return;
  }
  CompositeProblem prob = base;
  prob.f = std::make_shared<SeparableStructured>(ss->rows(), ss->offsets(), std::make_shared<CountingNegLog>(),
                                                 ss->weights(), ss->region());
  bool pass = ref.residual < 1e-10;
  std::string d = "F* = " + fmt(ref.F) + " (residual " + fmt(ref.residual) + ")";
  for (int p : {4, 5}) {
    max_order_seen = 0;
    RunOptions opt;
    opt.eps = 1e-6;
    opt.max_k = 200;
    opt.F_star = ref.F;
    const OuterTrace tr = biopt_run(prob, p, opt);
    const double gap = prob.F(tr.records.back().x) - ref.F;
    const bool ok = tr.converged && gap <= 1e-6 && max_order_seen <= 2;
    pass = pass && ok;
    d += ", p=" + std::to_string(p) + ": k=" + std::to_string(tr.iterations) + " gap " + fmt(gap) +
         " max scalar order " + std::to_string(max_order_seen.load());
  }
  const double t = seconds_since(t0);
  d += ", " + fmt(t) + " s";
  report(11, pass && t < 60, "bi-level runs on the separable neg-log instance", d);
}

}  // namespace

int main() {
  rate_bounds(1, Mode::plain, 5.0);
  rate_bounds(2, Mode::accelerated, 10.0);
  empirical_rates();

  report_suite(4, "certificate inequalities on every accepted step",
               summarize(run_suite("lemma1"), [](const CheckResult&) { return true; }));

  const std::vector<CheckResult> sandwich = run_suite("sandwich");
  report_suite(5, "relative sandwich with xi = 2",
               summarize(sandwich, [](const CheckResult& r) { return contains(r.name, "relative sandwich"); }));

  const std::vector<CheckResult> bregman = run_suite("bregman");
  report_suite(6, "inner descent inequality",
               summarize(bregman, [](const CheckResult& r) { return contains(r.name, " descent"); }));
  report_suite(6, "inner contraction against an accurate minimizer",
               summarize(bregman, [](const CheckResult& r) { return contains(r.name, " contraction"); }));
  inner_growth();

  example1();
  report_suite(8, "tensor-step region and acceptance at x = 0.8",
               summarize(run_suite("tensor"), [](const CheckResult& r) {
                 return contains(r.name, "region nonempty") || contains(r.name, "acceptance") ||
                        contains(r.name, "residual bound");
               }));
  report_suite(9, "scaling function curvature and bracket for p = 3, 4, 5",
               summarize(sandwich, [](const CheckResult& r) { return contains(r.name, "scaling"); }));
  oracle_fd();
  bilevel_neglog();

  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
