#include "biopt/outer_solvers.hpp"

#include <cmath>
#include <limits>

#include "biopt/errors.hpp"
#include "biopt/numerics.hpp"
#include "biopt/tensor_step.hpp"

namespace biopt {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

bool composite_stationary(const CompositeProblem& prob, const Vec& x) {
  const Vec g = prob.grad(x);
  return prob.psi.is_subgradient(x, -g, 1e-14 * (1.0 + g.norm()));
}

AcceptableSolution certify(const CompositeProblem& prob, const ProxConfig& cfg, const Vec& anchor,
                           const Vec& T) {
  const Vec target = -regularized_gradient(prob, cfg, anchor, T);
  AcceptableSolution out;
  out.cert = check_acceptable(prob, cfg, anchor, T, prob.psi.select_subgradient(T, target));
  return out;
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::plain: return "plain";
    case Mode::accelerated: return "accelerated";
    case Mode::bilevel: return "bilevel";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "plain") return Mode::plain;
  if (s == "accelerated") return Mode::accelerated;
  if (s == "bilevel") return Mode::bilevel;
  throw ArgumentError("unknown mode: " + s);
}

double coefficient_A(Mode mode, int p, double beta, double param, int k) {
  if (p < 1 || k < 0 || !(param > 0)) throw ArgumentError("coefficient parameters out of range");
  const double scale = std::pow(k / (p + 1.0), p + 1);
  if (mode == Mode::bilevel)
    return (p - 1) * factorial(p - 1) / (3.0 * p * std::pow(2.0, p + 1) * param) * scale;
  const double cp = std::pow((1 - beta) / param, 1.0 / p);
  return std::pow(cp / 2, p) * scale;
}

Coefficients coefficients(Mode mode, int p, double beta, double param, int k) {
  Coefficients c;
  c.A = coefficient_A(mode, p, beta, param, k);
  c.a_next = coefficient_A(mode, p, beta, param, k + 1) - c.A;
  return c;
}

EstimatingState initial_state(const Vec& x0) {
  EstimatingState st;
  st.x0 = x0;
  st.s = Vec::Zero(x0.size());
  return st;
}

EstimatingState estimating_update(const EstimatingState& st, const Vec& T, double fT, const Vec& grad_at_T,
                                  double a_next) {
  if (!(a_next > 0)) throw ArgumentError("estimating update needs a_{k+1} > 0");
  EstimatingState out = st;
  out.k = st.k + 1;
  out.A = st.A + a_next;
  out.s += a_next * grad_at_T;
  out.c += a_next * (fT - grad_at_T.dot(T));
  out.weight += a_next;
  return out;
}

double estimating_value(const EstimatingState& st, const SimpleTerm& psi, const PowerProx& pp, const Vec& x) {
  double v = st.s.dot(x) + st.c + dp1_value(pp, x - st.x0);
  if (st.weight > 0) v += st.weight * psi.value(x);
  return v;
}

Vec psi_argmin(const EstimatingState& st, const SimpleTerm& psi, const PowerProx& pp) {
  const int p = pp.p;
  if (psi.kind() == SimpleTerm::Kind::zero || st.weight == 0.0) {
    const double sn = dual_norm(pp.metric, st.s);
    if (sn == 0.0) return st.x0;
    return st.x0 - std::pow(sn, (1.0 - p) / p) * pp.metric.solve(st.s);
  }
  if (!pp.metric.is_identity()) throw CapabilityError("psi_argmin with nonzero psi assumes the identity metric");
  const auto x_of = [&](double r) { return psi.prox(st.s, st.x0, std::pow(r, p - 1), st.weight); };
  const auto phi = [&](double r) { return (x_of(r) - st.x0).norm() - r; };
  double hi = 2 * std::pow(st.s.norm(), 1.0 / p) + 1;
  for (int i = 0; i < 200 && phi(hi) > 0; ++i) hi *= 2;
  double lo = hi;
  while (phi(lo) <= 0 && std::pow(0.5 * lo, p - 1) > 1e-280) lo *= 0.5;
  if (phi(lo) <= 0) return psi.contains(st.x0) ? st.x0 : x_of(lo);
  for (int it = 0; it < 2000; ++it) {
    const double m = 0.5 * (lo + hi);
    if (!(m > lo && m < hi)) break;
    if (phi(m) > 0) lo = m;
    else hi = m;
  }
  return x_of(0.5 * (lo + hi));
}

Provider exact_1d_provider(const CompositeProblem& prob, const ProxConfig& cfg) {
  if (prob.dim() != 1) throw CapabilityError("exact provider needs a one-dimensional problem");
  return [&prob, cfg](const Vec& y) {
    const auto [T, g] = exact_prox_1d(prob, cfg, y(0));
    AcceptableSolution out;
    out.cert = check_acceptable(prob, cfg, y, Vec::Constant(1, T), Vec::Constant(1, g));
    return out;
  };
}

Provider newton_provider(const CompositeProblem& prob, const ProxConfig& cfg) {
  return [&prob, cfg](const Vec& y) { return certify(prob, cfg, y, solve_prox_subproblem(prob, cfg, y)); };
}

Provider inner_provider(const CompositeProblem& prob, const ProxConfig& cfg, const RelativeConstants& rc,
                        int max_inner) {
  if (rc.H != cfg.H) throw ArgumentError("relative constants were built for a different H");
  return [&prob, cfg, rc, max_inner](const Vec& y) {
    const ScalingFunction sf(prob, y, cfg.p, cfg.H);
    auto [cert, tr] = inner_solve(sf, cfg, rc, y, max_inner);
    AcceptableSolution out;
    out.cert = cert;
    out.inner_iterations = tr.iterations;
    out.trace = std::move(tr);
    return out;
  };
}

Provider tensor_provider(const CompositeProblem& prob, const ProxConfig& cfg, double M, double gamma) {
  if (prob.dim() != 1) throw CapabilityError("tensor steps are one-dimensional");
  return [&prob, cfg, M, gamma](const Vec& y) {
    const TaylorModel tm = make_taylor_model(prob, y, cfg.p, M);
    const TensorStep st = tensor_step_1d(tm, prob.psi, gamma);
    AcceptableSolution out;
    out.cert = check_acceptable(prob, cfg, y, Vec::Constant(1, st.T), Vec::Constant(1, st.g));
    return out;
  };
}

namespace {

bool should_stop(const CompositeProblem& prob, const RunOptions& opt, const OuterTrace& tr, OuterRecord& rec) {
  rec.gap = opt.F_star ? rec.F - *opt.F_star : std::numeric_limits<double>::quiet_NaN();
  if (opt.F_star && rec.gap <= opt.eps) return true;
  if (opt.eps_residual > 0 && !tr.certificates.empty() && tr.certificates.back().rhs <= opt.eps_residual)
    return true;
  return composite_stationary(prob, rec.x);
}

void record_step(OuterTrace& tr, OuterRecord& rec, const Vec& y, AcceptableSolution&& sol, bool keep) {
  rec.y = y;
  rec.stepped = true;
  rec.inner_iters = sol.inner_iterations;
  rec.cert_lhs = sol.cert.lhs;
  rec.cert_rhs = sol.cert.rhs;
  tr.certificates.push_back(sol.cert);
  if (keep && sol.trace) tr.inner_traces.push_back(std::move(*sol.trace));
}

}  // namespace

OuterTrace ihopp_run(const CompositeProblem& prob, const ProxConfig& cfg, const Provider& provider,
                     const RunOptions& opt) {
  cfg.validate();
  if (!cfg.beta_within_inverse_p()) throw ArgumentError("outer loops need beta <= 1/p");
  if (!prob.psi.contains(prob.x0)) throw DomainError("x0 outside dom psi");
  OuterTrace tr;
  tr.mode = Mode::plain;
  tr.cfg = cfg;
  tr.param = cfg.H;
  Vec x = prob.x0;
  for (int k = 0;; ++k) {
    OuterRecord rec;
    rec.k = k;
    rec.x = x;
    rec.F = prob.F(x);
    if (should_stop(prob, opt, tr, rec)) {
      tr.converged = true;
      tr.records.push_back(rec);
      break;
    }
    if (k >= opt.max_k) {
      tr.records.push_back(rec);
      break;
    }
    AcceptableSolution sol = provider(x);
    const Vec T = sol.cert.T;
    record_step(tr, rec, x, std::move(sol), opt.keep_inner_traces);
    tr.records.push_back(rec);
    x = T;
  }
  tr.iterations = tr.records.back().k;
  return tr;
}

OuterTrace aihopp_run(const CompositeProblem& prob, const ProxConfig& cfg, Mode mode, double param,
                      const Provider& provider, const RunOptions& opt) {
  cfg.validate();
  if (mode == Mode::plain) throw ArgumentError("aihopp_run needs an accelerated mode");
  if (!cfg.beta_within_inverse_p()) throw ArgumentError("outer loops need beta <= 1/p");
  if (!prob.psi.contains(prob.x0)) throw DomainError("x0 outside dom psi");
  const PowerProx pp(cfg.p, prob.metric);
  OuterTrace tr;
  tr.mode = mode;
  tr.cfg = cfg;
  tr.param = param;
  EstimatingState st = initial_state(prob.x0);
  Vec x = prob.x0;
  double Fx = prob.F(x);
  for (int k = 0;; ++k) {
    const Coefficients co = coefficients(mode, cfg.p, cfg.beta, param, k);
    OuterRecord rec;
    rec.k = k;
    rec.x = x;
    rec.F = Fx;
    rec.A = co.A;
    rec.v = psi_argmin(st, prob.psi, pp);
    tr.states.push_back(st);
    if (should_stop(prob, opt, tr, rec)) {
      tr.converged = true;
      tr.records.push_back(rec);
      break;
    }
    if (k >= opt.max_k) {
      tr.records.push_back(rec);
      break;
    }
    const double Anext = co.A + co.a_next;
    const Vec y = (co.A / Anext) * x + (co.a_next / Anext) * rec.v;
    AcceptableSolution sol = provider(y);
    const Vec T = sol.cert.T;
    record_step(tr, rec, y, std::move(sol), opt.keep_inner_traces);
    tr.records.push_back(rec);
    const double FT = prob.F(T);
    st = estimating_update(st, T, prob.f->value(T), prob.grad(T), co.a_next);
    if (FT <= Fx) {
      x = T;
      Fx = FT;
    }
  }
  tr.iterations = tr.records.back().k;
  return tr;
}

OuterTrace biopt_run(const CompositeProblem& prob, int p, const RunOptions& opt, int max_inner) {
  const double M = prob.regularity_bound(p + 1);
  const double H = bilevel_H(p, M);
  const ProxConfig cfg = make_prox_config(p, H, 1.0 / p);
  const RelativeConstants rc = relative_constants(p, H, M);
  return aihopp_run(prob, cfg, Mode::bilevel, M, inner_provider(prob, cfg, rc, max_inner), opt);
}

double bound_evaluator(Mode mode, int p, double beta, double H, double dist, double gap0, int k) {
  if (k <= 0) return std::numeric_limits<double>::infinity();
  const double ratio = (2.0 * p + 2.0) / k;
  if (mode == Mode::plain)
    return 0.5 * (H * std::pow(dist, p + 1) / (1 - beta) + gap0) * std::pow(ratio, p);
  return H / (2 * (1 - beta)) * std::pow(dist, p + 1) / (p + 1) * std::pow(ratio, p + 1);
}

BoundInputs attach_bounds(OuterTrace& tr, const CompositeProblem& prob, double F_star, const Vec& x_star,
                          std::optional<double> D0) {
  BoundInputs in;
  in.R0 = primal_norm(prob.metric, prob.x0 - x_star);
  in.gap0 = prob.F(prob.x0) - F_star;
  double dmax = 0.0;
  for (const auto& r : tr.records) dmax = std::max(dmax, primal_norm(prob.metric, r.x - x_star));
  in.D0 = D0.value_or(dmax);
  const double dist = tr.mode == Mode::plain ? in.D0 : in.R0;
  for (auto& r : tr.records) {
    r.gap = r.F - F_star;
    r.bound_rhs = bound_evaluator(tr.mode, tr.cfg.p, tr.cfg.beta, tr.cfg.H, dist, in.gap0, r.k);
  }
  return in;
}

SlopeFit log_log_slope(const OuterTrace& tr, int kmin, int kmax, double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : tr.records) {
    if (r.k < kmin || r.k > kmax || !(r.gap > floor)) continue;
    const double lx = std::log(static_cast<double>(r.k)), ly = std::log(r.gap);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  SlopeFit fit;
  fit.points = n;
  if (n < 2) {
    fit.slope = fit.intercept = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

ProxConfig resolve_config(const CompositeProblem& prob, const SolverSetup& s) {
  if (s.mode == Mode::bilevel) {
    if (s.H) throw ArgumentError("bilevel mode fixes H = 6 M_{p+1}/(p-1)!");
    if (s.beta && std::abs(*s.beta - 1.0 / s.p) > 1e-15) throw ArgumentError("bilevel mode fixes beta = 1/p");
    return make_prox_config(s.p, bilevel_H(s.p, prob.regularity_bound(s.p + 1)), 1.0 / s.p);
  }
  double H = 1.0;
  if (s.H) {
    H = *s.H;
  } else {
    try {
      const double M = prob.regularity_bound(s.p + 1);
      if (M > 0) H = bilevel_H(s.p, M);
    } catch (const CapabilityError&) {
    }
  }
  return make_prox_config(s.p, H, s.beta.value_or(1.0 / s.p));
}

OuterTrace run_solver(const CompositeProblem& prob, const SolverSetup& s, const RunOptions& opt) {
  if (s.mode == Mode::bilevel) {
    resolve_config(prob, s);
    return biopt_run(prob, s.p, opt, s.max_inner);
  }
  const ProxConfig cfg = resolve_config(prob, s);
  std::string kind = s.provider;
  std::optional<RelativeConstants> rc;
  if (kind == "auto") {
    kind = prob.dim() == 1 ? "exact" : "newton";
    if (prob.dim() > 1) {
      try {
        rc = relative_constants(cfg.p, cfg.H, prob.regularity_bound(cfg.p + 1));
        kind = "inner";
      } catch (const std::exception&) {
      }
    }
  }
  Provider provider;
  if (kind == "exact") {
    provider = exact_1d_provider(prob, cfg);
  } else if (kind == "newton") {
    provider = newton_provider(prob, cfg);
  } else if (kind == "inner") {
    if (!rc) rc = relative_constants(cfg.p, cfg.H, prob.regularity_bound(cfg.p + 1));
    provider = inner_provider(prob, cfg, *rc, s.max_inner);
  } else {
    throw ArgumentError("unknown provider: " + kind);
  }
  if (s.mode == Mode::plain) return ihopp_run(prob, cfg, provider, opt);
  return aihopp_run(prob, cfg, Mode::accelerated, cfg.H, provider, opt);
}

}  // namespace biopt
