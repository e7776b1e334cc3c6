#include "biopt/verify.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "biopt/errors.hpp"
#include "biopt/outer_solvers.hpp"
#include "biopt/tensor_step.hpp"

namespace biopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CheckResult make(const std::string& suite, const std::string& name, double value, double threshold,
                 const std::string& detail = "") {
  return {suite, name, value, threshold, value <= threshold, detail};
}

Vec feasible_sample(const CompositeProblem& prob, std::mt19937_64& rng) {
  return prob.psi.project(prob.sample(rng));
}

struct RunSpec {
  std::string problem;
  Mode mode;
  int p;
  int max_k;
};

std::vector<CheckResult> certificate_suite() {
  const std::vector<RunSpec> runs = {{"quartic-abs-1d", Mode::plain, 3, 100},
                                     {"quartic-abs-1d", Mode::accelerated, 3, 100},
                                     {"quartic-abs-1d", Mode::bilevel, 3, 100},
                                     {"power8-1d", Mode::plain, 2, 60},
                                     {"quartic-sep-10d", Mode::plain, 3, 40},
                                     {"quartic-sep-10d", Mode::bilevel, 3, 30},
                                     {"ball-quadratic", Mode::bilevel, 3, 60},
                                     {"neglog-sep", Mode::bilevel, 4, 60},
                                     {"logistic-l1", Mode::plain, 3, 40}};
  std::vector<CheckResult> out;
  for (const auto& r : runs) {
    const CompositeProblem prob = make_problem(r.problem);
    SolverSetup s;
    s.mode = r.mode;
    s.p = r.p;
    RunOptions opt;
    opt.max_k = r.max_k;
    opt.F_star = reference_solution(prob).F;
    opt.eps = 1e-10;
    const OuterTrace tr = run_solver(prob, s, opt);
    int failures = 0;
    double worst = kInf;
    for (const auto& c : tr.certificates) {
      const CertificateChecks ch = certificate_inequalities(c, tr.cfg, prob.metric);
      if (!c.accepted || !ch.all()) ++failures;
      worst = std::min(worst, ch.worst);
    }
    std::ostringstream d;
    d << tr.certificates.size() << " certificates, worst slack " << worst;
    out.push_back(make("lemma1", r.problem + "/" + mode_name(r.mode) + "/p" + std::to_string(r.p), failures, 0,
                       d.str()));
  }
  return out;
}

std::vector<CheckResult> estseq_suite() {
  const std::vector<RunSpec> runs = {{"quartic-abs-1d", Mode::accelerated, 3, 50},
                                     {"power8-1d", Mode::accelerated, 2, 50},
                                     {"quartic-sep-10d", Mode::accelerated, 3, 50},
                                     {"ball-quadratic", Mode::bilevel, 3, 50}};
  std::vector<CheckResult> out;
  std::mt19937_64 rng(2024);
  for (const auto& r : runs) {
    const CompositeProblem prob = make_problem(r.problem);
    const ReferenceSolution ref = reference_solution(prob);
    SolverSetup s;
    s.mode = r.mode;
    s.p = r.p;
    RunOptions opt;
    opt.max_k = r.max_k;
    opt.eps = 0.0;
    const OuterTrace tr = run_solver(prob, s, opt);
    const PowerProx pp(r.p, prob.metric);
    const double sigma = dp1_uniform_convexity(r.p);
    double upper = -kInf, lower = -kInf, key = -kInf, upsilon = -kInf, mono = -kInf;
    const double d0 = dp1_value(pp, prob.x0 - ref.x);
    for (std::size_t k = 0; k < tr.records.size(); ++k) {
      const OuterRecord& rec = tr.records[k];
      const EstimatingState& st = tr.states[k];
      const double psi_v = estimating_value(st, prob.psi, pp, rec.v);
      for (int j = 0; j < 100; ++j) {
        const Vec x = feasible_sample(prob, rng);
        const double px = estimating_value(st, prob.psi, pp, x);
        upper = std::max(upper, px - (st.A * prob.F(x) + dp1_value(pp, x - prob.x0)));
        lower = std::max(lower, psi_v + sigma * std::pow(primal_norm(prob.metric, x - rec.v), r.p + 1) - px);
      }
      key = std::max(key, st.A * rec.F - psi_v);
      upsilon = std::max(upsilon, dp1_value(pp, rec.v - ref.x) - std::pow(2.0, r.p - 1) * d0);
      if (k > 0) mono = std::max(mono, rec.F - tr.records[k - 1].F);
    }
    const std::string tag = r.problem + "/" + mode_name(r.mode);
    out.push_back(make("estseq", tag + " upper sandwich", upper, 1e-8));
    out.push_back(make("estseq", tag + " lower sandwich", lower, 1e-8));
    out.push_back(make("estseq", tag + " key inequality", key, 1e-8));
    out.push_back(make("estseq", tag + " upsilon distance", upsilon, 0.0));
    out.push_back(make("estseq", tag + " monotone F", mono, 1e-12));

    const double cp = std::pow((1 - tr.cfg.beta) / tr.cfg.H, 1.0 / r.p);
    double coef = -kInf;
    for (int k = 0; k <= 10000; ++k) {
      const Coefficients c = coefficients(tr.mode, r.p, tr.cfg.beta, tr.param, k);
      const double An = c.A + c.a_next;
      coef = std::max(coef, (std::pow(c.a_next, (r.p + 1.0) / r.p) - cp / 2 * An) / An);
    }
    out.push_back(make("estseq", tag + " coefficient inequality", coef, 1e-12));
  }
  return out;
}

struct BilevelSpec {
  std::string problem;
  int p;
  int max_k;
};

std::vector<CheckResult> bregman_suite() {
  const std::vector<BilevelSpec> runs = {
      {"quartic-abs-1d", 3, 40}, {"ball-quadratic", 3, 40}, {"quartic-sep-10d", 3, 15}, {"neglog-sep", 4, 40}};
  std::vector<CheckResult> out;
  std::mt19937_64 rng(77);
  for (const auto& r : runs) {
    const CompositeProblem prob = make_problem(r.problem);
    RunOptions opt;
    opt.max_k = r.max_k;
    opt.F_star = reference_solution(prob).F;
    opt.eps = 1e-10;
    opt.keep_inner_traces = true;
    const OuterTrace tr = biopt_run(prob, r.p, opt);
    const ProxConfig& cfg = tr.cfg;
    const RelativeConstants rc = relative_constants(r.p, cfg.H, tr.param);
    double descent = -kInf, contraction = -kInf, variational = -kInf;
    int steps = 0;
    for (const InnerTrace& it : tr.inner_traces) {
      const Vec& y = it.records.front().z;
      const ScalingFunction sf(prob, y, r.p, cfg.H);
      const Vec zs = solve_prox_subproblem(prob, cfg, y);
      const double phis = phi_value(prob, cfg, y, zs);
      const double b0 = bregman_distance(sf, y, zs);
      for (std::size_t i = 1; i < it.records.size(); ++i) {
        const InnerRecord& prev = it.records[i - 1];
        const InnerRecord& cur = it.records[i];
        descent = std::max(descent, cur.phi - prev.phi + rc.L * cur.bregman_step);
        const double rhs = std::pow(1 - rc.kappa / 2, static_cast<double>(i)) * b0 + (phis - cur.phi) / (2 * rc.L);
        contraction = std::max(contraction, bregman_distance(sf, cur.z, zs) - rhs);
        const InnerStep st = inner_step(sf, cfg, rc.L, prev.z);
        const double pz = prob.psi.value(st.z);
        for (int j = 0; j < 100; ++j) {
          const Vec z = feasible_sample(prob, rng);
          variational = std::max(variational, pz + st.g.dot(z - st.z) - prob.psi.value(z));
        }
        ++steps;
      }
    }
    const std::string tag = r.problem + "/p" + std::to_string(r.p);
    const std::string det = std::to_string(tr.inner_traces.size()) + " inner runs, " + std::to_string(steps) + " steps";
    out.push_back(make("bregman", tag + " descent", descent, 1e-10, det));
    out.push_back(make("bregman", tag + " contraction", contraction, 1e-8, det));
    out.push_back(make("bregman", tag + " variational principle", variational, 1e-9, det));

    double three = 0.0;
    for (int j = 0; j < 200; ++j) {
      const ScalingFunction sf(prob, prob.sample(rng), r.p, cfg.H);
      const Vec x = prob.sample(rng), yy = prob.sample(rng), z = prob.sample(rng);
      const double lhs = bregman_distance(sf, x, z) - bregman_distance(sf, yy, z) + bregman_distance(sf, yy, x);
      const double rhs = (sf.gradient(yy) - sf.gradient(x)).dot(z - x);
      three = std::max(three, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    out.push_back(make("bregman", tag + " three-point identity", three, 1e-10));
  }
  return out;
}

std::vector<CheckResult> sandwich_suite() {
  std::vector<CheckResult> out;
  for (const auto& id : problem_ids()) {
    const CompositeProblem prob = make_problem(id);
    for (int p = 3; p <= 5; ++p) {
      double M = 0.0;
      try {
        M = prob.regularity_bound(p + 1);
      } catch (const CapabilityError&) {
        continue;
      }
      const std::string tag = id + "/p" + std::to_string(p);
      const BracketReport br = scaling_bracket_check(prob, p, 2.0, 1000, 17 + p);
      out.push_back(make("sandwich", tag + " scaling hessian nonnegative", -br.min_rho_form, 1e-10));
      std::ostringstream d;
      d << "odd orders up to 2q+1 without scaling: " << br.max_violation_literal;
      out.push_back(make("sandwich", tag + " scaling bracket", br.max_violation, 1e-8, d.str()));
      const bool sandwich_here = M > 0 && (p == 3 || id == "neglog-sep");
      if (!sandwich_here) continue;
      const RelativeConstants rc = relative_constants(p, bilevel_H(p, M), M);
      const SandwichReport sw = relative_sandwich_check(prob, p, rc, 1000, 31 + p);
      out.push_back(make("sandwich", tag + " relative sandwich", std::max(sw.max_violation, sw.max_hessian_violation),
                         1e-8));
    }
  }
  return out;
}

std::vector<CheckResult> theta_suite() {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  const auto ball_point = [&](const Vec& c, double R) {
    Vec u(c.size());
    for (int j = 0; j < u.size(); ++j) u(j) = nd(rng);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    return Vec(c + R * std::pow(ur(rng), 1.0 / c.size()) * u / u.norm());
  };
  for (int p = 2; p <= 5; ++p) {
    for (double R : {0.5, 1.0, 2.0}) {
      const ThetaBound th = theta_bound(p, R, 1.0, 0.0);
      const PowerProx pp(p, MetricSpace::identity(3));
      double worst = -kInf;
      for (int j = 0; j < 1000; ++j) {
        const Vec x = ball_point(Vec::Zero(3), R), y = ball_point(Vec::Zero(3), R);
        const double b = dp1_value(pp, y) - dp1_value(pp, x) - dp1_gradient(pp, x).dot(y - x);
        worst = std::max(worst, b - th.power_part((x - y).norm()));
      }
      std::ostringstream name;
      name << "power part p" << p << " R" << R;
      out.push_back(make("theta", name.str(), worst, 0.0));
    }
  }
  const std::vector<std::pair<std::string, int>> probs = {
      {"quartic-abs-1d", 3}, {"quartic-sep-10d", 3}, {"neglog-sep", 4}, {"neglog-sep", 5}, {"logistic-l1", 4}};
  for (const auto& [id, p] : probs) {
    const CompositeProblem prob = make_problem(id);
    const double R = 1.0;
    std::vector<std::array<Vec, 3>> triples;
    for (int j = 0; j < 1000; ++j) {
      const Vec yk = prob.sample(rng);
      triples.push_back({yk, ball_point(yk, R), ball_point(yk, R)});
    }
    double Lhat = 0.0;
    for (const auto& t : triples) {
      const ScalingFunction sf(prob, t[0], p, 1.0);
      for (int m = 0; m <= 8; ++m) {
        const Vec w = t[1] + (m / 8.0) * (t[2] - t[1]);
        Lhat = std::max(Lhat, Eigen::SelfAdjointEigenSolver<Mat>(sf.poly_hessian(w)).eigenvalues().maxCoeff());
      }
    }
    const ThetaBound th = theta_bound(p, R, 1.0, Lhat);
    double worst = -kInf;
    for (const auto& t : triples) {
      const ScalingFunction sf(prob, t[0], p, 1.0);
      worst = std::max(worst, bregman_distance(sf, t[1], t[2]) - th((t[1] - t[2]).norm()));
    }
    std::ostringstream d;
    d << "sampled Lhat " << Lhat;
    out.push_back(make("theta", id + "/p" + std::to_string(p) + " domination", worst, 0.0, d.str()));
  }
  return out;
}

std::vector<CheckResult> tensor_suite() {
  std::vector<CheckResult> out;
  const CompositeProblem prob = make_problem("quartic-abs-1d");
  const int p = 3;
  const double mp1 = prob.regularity_bound(p + 1);
  const double gamma = 8.0 / 19.0, xbar = 0.8;
  const Vec xb = Vec::Constant(1, xbar);

  const auto scan = [&](double M, const std::function<bool(const Vec&, const Vec&)>& accept) {
    const TaylorModel tm = make_taylor_model(prob, xb, p, M);
    int passing = 0, failing = 0;
    for (int i = 0; i <= 20000; ++i) {
      const Vec T = Vec::Constant(1, -0.5 + 1.5 * i / 20000.0);
      const Vec target = -augmented_value_grad(tm, T).second;
      const Vec g = prob.psi.select_subgradient(T, target);
      if (!tensor_criterion(tm, T, g, gamma).criterion_ok) continue;
      ++passing;
      if (!accept(T, g)) ++failing;
    }
    return std::pair{passing, failing};
  };
  {
    const double M = 1.9 * mp1;
    const auto [n, bad] =
        scan(M, [&](const Vec& T, const Vec& g) { return tensor_residual_bound_check(prob, p, xb, T, g, M, gamma, mp1); });
    out.push_back(make("tensor", "model M = 1.9 M4: region nonempty", n > 0 ? 0 : 1, 0, std::to_string(n) + " points"));
    out.push_back(make("tensor", "model M = 1.9 M4: residual bound", bad, 0));
  }
  {
    const auto [M, H] = tensor_acceptance_map(p, 0.9, gamma, mp1);
    const ProxConfig cfg = make_prox_config(p, H, 0.9);
    const auto [n, bad] =
        scan(M, [&](const Vec& T, const Vec& g) { return check_acceptable(prob, cfg, xb, T, g).accepted; });
    out.push_back(make("tensor", "mapped M: region nonempty", n > 0 ? 0 : 1, 0, std::to_string(n) + " points"));
    out.push_back(make("tensor", "mapped M: acceptance", bad, 0));
  }
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    int bad = 0, ok = 0;
    for (double beta : {0.3, 0.6, 0.9}) {
      const double gm = 0.5 * beta / (1 + beta);
      const auto [M, H] = tensor_acceptance_map(p, beta, gm, mp1);
      const ProxConfig cfg = make_prox_config(p, H, tensor_residual_factor(mp1, M, gm));
      for (int j = 0; j < 300; ++j) {
        const Vec x = Vec::Constant(1, u(rng));
        const TensorStep st = tensor_step_1d(make_taylor_model(prob, x, p, M), prob.psi, gm);
        if (!st.criterion_ok) continue;
        ++ok;
        const Vec T = Vec::Constant(1, st.T), g = Vec::Constant(1, st.g);
        if (!check_acceptable(prob, cfg, x, T, g).accepted) ++bad;
      }
    }
    out.push_back(make("tensor", "criterion implies acceptance", bad, 0, std::to_string(ok) + " steps"));
  }
  {
    std::mt19937_64 rng(6);
    double worst = -kInf;
    for (const auto& id : problem_ids()) {
      const CompositeProblem pr = make_problem(id);
      for (int q = 2; q <= 4; ++q) {
        double M = 0.0;
        try {
          M = pr.regularity_bound(q + 1);
        } catch (const CapabilityError&) {
          continue;
        }
        double fact = 1.0;
        for (int i = 2; i <= q; ++i) fact *= i;
        for (int j = 0; j < 200; ++j) {
          const Vec x = pr.sample(rng), y = pr.sample(rng);
          const TaylorModel tm = make_taylor_model(pr, x, q, M);
          const double lhs = dual_norm(pr.metric, pr.grad(y) - taylor_value_grad(tm, y).second);
          const double rhs = M / fact * std::pow(primal_norm(pr.metric, y - x), q);
          worst = std::max(worst, (lhs - rhs) / std::max(1.0, rhs));
        }
      }
    }
    out.push_back(make("tensor", "model gradient bound", worst, 1e-10));
  }
  {
    double worst = -kInf;
    for (double mult : {3.0, 4.0, 10.0}) {
      const TaylorModel tm = make_taylor_model(prob, xb, p, mult * mp1);
      double prev = -kInf;
      for (int i = 0; i <= 1000; ++i) {
        const double t = -2.0 + 4.0 * i / 1000.0;
        const double gv = augmented_value_grad(tm, Vec::Constant(1, t)).second(0);
        worst = std::max(worst, prev - gv);
        prev = gv;
      }
    }
    out.push_back(make("tensor", "model monotone for M >= p M4", worst, 1e-12));
  }
  return out;
}

}  // namespace

std::vector<std::string> suite_ids() { return {"lemma1", "estseq", "bregman", "sandwich", "theta", "tensor"}; }

std::vector<CheckResult> run_suite(const std::string& id) {
  if (id == "all") {
    std::vector<CheckResult> all;
    for (const auto& s : suite_ids()) {
      auto part = run_suite(s);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  if (id == "lemma1") return certificate_suite();
  if (id == "estseq") return estseq_suite();
  if (id == "bregman") return bregman_suite();
  if (id == "sandwich") return sandwich_suite();
  if (id == "theta") return theta_suite();
  if (id == "tensor") return tensor_suite();
  throw ArgumentError("unknown suite: " + id);
}

}  // namespace biopt
